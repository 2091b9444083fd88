// SPDX-License-Identifier: Apache-2.0
#include "twobounce/transient.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rng.hpp"
#include "twobounce/parallel.hpp"

namespace twobounce {

TransientCube TransientCube::for_scene(const SceneConfig& scene, CubeKind kind) {
  return TransientCube(scene.obs_wall.grid_u, scene.obs_wall.grid_v, scene.time.n_bins, kind);
}

double TransientCube::total() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

MultiplexPattern::MultiplexPattern(int captures, int sources, std::vector<std::uint8_t> entries)
    : captures_(captures), sources_(sources), entries_(std::move(entries)) {
  if (captures_ < 1 || sources_ < 1) throw Error("multiplex pattern needs at least one capture and one source");
  if (captures_ > sources_) throw Error("multiplex pattern has more captures than sources");
  if (entries_.size() != static_cast<std::size_t>(captures_) * static_cast<std::size_t>(sources_)) {
    throw Error("multiplex pattern entry count does not match M x K");
  }
  for (auto& e : entries_) e = e != 0 ? 1 : 0;
  for (int k = 0; k < sources_; ++k) {
    bool used = false;
    for (int m = 0; m < captures_ && !used; ++m) used = active(m, k);
    if (!used) throw Error("multiplex pattern leaves source " + std::to_string(k) + " unused");
  }
}

MultiplexPattern MultiplexPattern::identity(int sources) { return blocks(sources, sources); }

MultiplexPattern MultiplexPattern::blocks(int sources, int captures) {
  if (captures < 1 || sources < 1) throw Error("multiplex pattern needs at least one capture and one source");
  std::vector<std::uint8_t> e(static_cast<std::size_t>(captures) * static_cast<std::size_t>(sources), 0);
  for (int m = 0; m < captures; ++m) {
    const long begin = static_cast<long>(m) * sources / captures;
    const long end = static_cast<long>(m + 1) * sources / captures;
    for (long k = begin; k < end; ++k) e[static_cast<std::size_t>(m) * sources + k] = 1;
  }
  return MultiplexPattern(captures, sources, std::move(e));
}

MultiplexPattern MultiplexPattern::strided(int sources, int captures) {
  if (captures < 1 || sources < 1) throw Error("multiplex pattern needs at least one capture and one source");
  std::vector<std::uint8_t> e(static_cast<std::size_t>(captures) * static_cast<std::size_t>(sources), 0);
  for (int k = 0; k < sources; ++k) e[static_cast<std::size_t>(k % captures) * sources + k] = 1;
  return MultiplexPattern(captures, sources, std::move(e));
}

MultiplexPattern MultiplexPattern::random(int sources, int captures, std::uint64_t seed) {
  if (captures < 1 || sources < 1) throw Error("multiplex pattern needs at least one capture and one source");
  detail::CounterStream rng(seed, 0);
  std::vector<std::uint8_t> e(static_cast<std::size_t>(captures) * static_cast<std::size_t>(sources), 0);
  for (auto& x : e) x = static_cast<std::uint8_t>(rng() >> 63);
  for (int k = 0; k < sources; ++k) {
    bool used = false;
    for (int m = 0; m < captures; ++m) used = used || e[static_cast<std::size_t>(m) * sources + k];
    if (!used) e[static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(captures)) * sources + k] = 1;
  }
  return MultiplexPattern(captures, sources, std::move(e));
}

std::vector<std::uint8_t> MultiplexPattern::row(int capture) const {
  const auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(capture) * sources_;
  return {begin, begin + sources_};
}

namespace {

void check_row(const SceneConfig& scene, std::span<const std::uint8_t> row) {
  if (row.size() != scene.source_count()) {
    throw Error("pattern row has " + std::to_string(row.size()) + " entries, scene has " +
                std::to_string(scene.source_count()) + " sources");
  }
}

// Shared renderer. With `occ` null every path is visible.
TransientCube render(const SceneConfig& scene, const OccupancyVolume* occ, std::span<const std::uint8_t> row,
                     CubeKind kind) {
  check_row(scene, row);
  const auto sources = scene.sources();
  const auto detectors = scene.detectors();
  TransientCube cube = TransientCube::for_scene(scene, kind);
  bool any_active = false;
  bool any_event = false;
  for (std::size_t k = 0; k < sources.size(); ++k) any_active = any_active || row[k] != 0;

  parallel_for(detectors.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3& s = detectors[i];
      for (std::size_t k = 0; k < sources.size(); ++k) {
        if (row[k] == 0) continue;
        const Vec3& l = sources[k];
        const auto bin = path_bin(scene.laser_origin, l, s, scene);
        if (!bin) continue;
        if (occ != nullptr && visibility(*occ, l, s) == 0) continue;
        const double r2 = (l - s).squaredNorm();
        cube.at(i, *bin) += scene.include_falloff ? scene.laser_intensity / r2 : scene.laser_intensity;
      }
    }
  });
  if (any_active) {
    for (std::size_t i = 0; i < detectors.size() && !any_event; ++i) {
      for (std::size_t k = 0; k < sources.size() && !any_event; ++k) {
        any_event = row[k] != 0 && path_bin(scene.laser_origin, sources[k], detectors[i], scene).has_value();
      }
    }
    if (!any_event) warn("time axis holds none of the two-bounce arrivals; transient is all zero");
  }
  return cube;
}

}  // namespace

TransientCube empty_transient(const SceneConfig& scene, std::span<const std::uint8_t> pattern_row) {
  return render(scene, nullptr, pattern_row, CubeKind::empty);
}

int visibility(const OccupancyVolume& occ, const Vec3& l, const Vec3& s) {
  if (!occ.binary) throw Error("visibility requires a binary occupancy");
  for (std::size_t v : ray_voxels(occ.grid, l, s)) {
    if (occ.values[v] != 0.0) return 0;
  }
  return 1;
}

TransientCube light_transient(const SceneConfig& scene, const OccupancyVolume& occ,
                              std::span<const std::uint8_t> pattern_row) {
  if (!occ.binary) throw Error("light transient requires a binary occupancy");
  if (!(occ.grid == scene.grid)) throw Error("occupancy grid does not match the scene grid");
  return render(scene, &occ, pattern_row, CubeKind::light);
}

TransientCube shadow_transient(const TransientCube& empty, const TransientCube& light) {
  if (!empty.same_shape(light)) throw Error("shadow transient: dimension mismatch between empty and light cubes");
  TransientCube out(empty.n_u, empty.n_v, empty.n_t, CubeKind::shadow);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = empty.values[i] - light.values[i];
  return out;
}

TransientCube clamp_nonnegative(const TransientCube& cube) {
  TransientCube out = cube;
  for (double& v : out.values) v = std::max(v, 0.0);
  return out;
}

TransientCube scaled(const TransientCube& cube, double factor) {
  TransientCube out = cube;
  for (double& v : out.values) v *= factor;
  out.counts = false;
  return out;
}

std::vector<TransientCube> multiplex(const std::vector<TransientCube>& per_source_cubes,
                                     const MultiplexPattern& pattern) {
  if (per_source_cubes.size() != static_cast<std::size_t>(pattern.sources())) {
    throw Error("multiplex: got " + std::to_string(per_source_cubes.size()) + " cubes for " +
                std::to_string(pattern.sources()) + " sources");
  }
  const TransientCube& first = per_source_cubes.front();
  for (const auto& c : per_source_cubes) {
    if (!c.same_shape(first)) throw Error("multiplex: per-source cubes differ in shape");
  }
  std::vector<TransientCube> out;
  out.reserve(static_cast<std::size_t>(pattern.captures()));
  for (int m = 0; m < pattern.captures(); ++m) {
    TransientCube capture(first.n_u, first.n_v, first.n_t, first.kind);
    for (int k = 0; k < pattern.sources(); ++k) {
      if (!pattern.active(m, k)) continue;
      const auto& src = per_source_cubes[static_cast<std::size_t>(k)].values;
      for (std::size_t i = 0; i < capture.size(); ++i) capture.values[i] += src[i];
    }
    out.push_back(std::move(capture));
  }
  return out;
}

TransientCube poisson_sample(const TransientCube& cube, std::uint64_t seed) {
  TransientCube out = cube;
  out.counts = true;
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const double rate = cube.values[i];
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw Error("poisson_sample: negative or non-finite rate at bin " + std::to_string(i) +
                  " (clamp shadow cubes first)");
    }
    if (rate == 0.0) {
      out.values[i] = 0.0;
      continue;
    }
    detail::CounterStream stream(seed, i);
    std::poisson_distribution<long long> dist(rate);
    out.values[i] = static_cast<double>(dist(stream));
  }
  return out;
}

TransientCube gaussian_time_blur(const TransientCube& cube, double fwhm_seconds, double bin_width) {
  if (!(fwhm_seconds > 0.0)) return cube;
  const double sigma = fwhm_seconds / (2.0 * std::sqrt(2.0 * std::log(2.0))) / bin_width;
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * static_cast<std::size_t>(radius) + 1);
  double norm = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    kernel[static_cast<std::size_t>(d + radius)] = std::exp(-0.5 * d * d / (sigma * sigma));
    norm += kernel[static_cast<std::size_t>(d + radius)];
  }
  for (double& w : kernel) w /= norm;

  TransientCube out(cube.n_u, cube.n_v, cube.n_t, cube.kind);
  for (std::size_t i = 0; i < cube.detectors(); ++i) {
    for (int t = 0; t < cube.n_t; ++t) {
      const double v = cube.at(i, t);
      if (v == 0.0) continue;
      for (int d = -radius; d <= radius; ++d) {
        const int tt = t + d;
        if (tt >= 0 && tt < cube.n_t) out.at(i, tt) += v * kernel[static_cast<std::size_t>(d + radius)];
      }
    }
  }
  return out;
}

IntensityImage intensity_projection(const TransientCube& cube) {
  IntensityImage img{cube.n_u, cube.n_v, std::vector<double>(cube.detectors(), 0.0)};
  for (int t = 0; t < cube.n_t; ++t) {
    for (std::size_t i = 0; i < cube.detectors(); ++i) img.values[i] += cube.at(i, t);
  }
  return img;
}

}  // namespace twobounce
