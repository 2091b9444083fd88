// SPDX-License-Identifier: Apache-2.0
#include "twobounce/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace twobounce {

std::size_t SnrMap::argmax() const {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double SnrMap::max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

OccupancyVolume SnrMap::as_volume() const {
  OccupancyVolume v = OccupancyVolume::zeros(grid);
  v.values = values;
  return v;
}

namespace {

struct PhotonBudget {
  double total = 0.0;
  std::vector<double> removed;
};

PhotonBudget photon_budget(const SceneConfig& scene) {
  const int k = static_cast<int>(scene.source_count());
  const auto op = MeasurementOperator::build(scene, MultiplexPattern::blocks(k, 1), OperatorOptions{true});
  PhotonBudget b;
  for (std::size_t i = 0; i < op.detectors(); ++i) {
    for (std::size_t s = 0; s < scene.source_count(); ++s) {
      if (op.ray_bin(i, s) >= 0) b.total += scene.laser_intensity * op.ray_weight(i, s);
    }
  }
  std::vector<double> ones(op.rows(), 1.0);
  b.removed.assign(op.cols(), 0.0);
  op.apply_adjoint(ones, b.removed);
  for (double& r : b.removed) r *= scene.laser_intensity;
  return b;
}

}  // namespace

SnrMap snr_map(const SceneConfig& scene) {
  const PhotonBudget b = photon_budget(scene);
  SnrMap map{scene.grid, std::vector<double>(b.removed.size()), b.total};
  for (std::size_t j = 0; j < b.removed.size(); ++j) map.values[j] = std::sqrt(std::max(0.0, b.total - b.removed[j]));
  return map;
}

SnrMap shadow_snr_map(const SceneConfig& scene) {
  const PhotonBudget b = photon_budget(scene);
  SnrMap map{scene.grid, std::vector<double>(b.removed.size(), 0.0), b.total};
  for (std::size_t j = 0; j < b.removed.size(); ++j) {
    const double rest = b.total - b.removed[j];
    if (b.removed[j] > 0.0) map.values[j] = rest > 0.0 ? b.removed[j] / std::sqrt(rest) : std::sqrt(b.removed[j]);
  }
  return map;
}

Fwhm psf_fwhm(const OccupancyVolume& psf, std::size_t center) {
  if (center >= psf.size()) throw GeometryError("psf_fwhm: center voxel out of range");
  const VoxelGrid& g = psf.grid;
  const auto c = g.unravel(center);
  const double peak = psf.values[center];
  Fwhm out;
  if (!(peak > 0.0)) {
    out.off_peak = true;
    return out;
  }
  const double half = 0.5 * peak;
  for (int axis = 0; axis < 3; ++axis) {
    const int n = g.dims[static_cast<std::size_t>(axis)];
    auto sample = [&](int idx) {
      auto p = c;
      p[static_cast<std::size_t>(axis)] = idx;
      return psf.at(p[0], p[1], p[2]);
    };
    for (int idx = 0; idx < n; ++idx) out.off_peak = out.off_peak || sample(idx) > peak;

    const int ci = c[static_cast<std::size_t>(axis)];
    // Walk outward to the last above-half sample, then interpolate to the crossing.
    auto edge = [&](int step) {
      int idx = ci;
      while (idx + step >= 0 && idx + step < n && sample(idx + step) >= half) idx += step;
      if (idx + step < 0 || idx + step >= n) return idx + 0.5 * step;
      const double inside = sample(idx);
      const double outside = sample(idx + step);
      return idx + step * (inside - half) / (inside - outside);
    };
    out.width[static_cast<std::size_t>(axis)] = (edge(+1) - edge(-1)) * g.voxel_size;
  }
  return out;
}

SceneConfig with_spatial_resolution(const SceneConfig& base, int spatial) {
  if (spatial < 1) throw Error("spatial resolution must be positive");
  SceneConfig s = base;
  if (s.obs_wall.grid_u > 1) s.obs_wall.grid_u = spatial;
  if (s.obs_wall.grid_v > 1) s.obs_wall.grid_v = spatial;
  if (base.obs_wall.grid_u == 1 && base.obs_wall.grid_v == 1) s.obs_wall.grid_u = spatial;
  return s;
}

SceneConfig with_temporal_resolution(const SceneConfig& base, double bin_width) {
  if (!(bin_width > 0.0)) throw Error("bin width must be positive");
  SceneConfig s = base;
  s.time.bin_width = bin_width;
  fit_time_axis(s);
  return s;
}

std::vector<SweepRecord> coherence_sweep(const SceneConfig& base, const std::vector<int>& spatial_list,
                                         const std::vector<double>& temporal_list,
                                         const std::vector<int>& captures_list, const SweepOptions& options) {
  if (spatial_list.empty() || temporal_list.empty() || captures_list.empty()) {
    throw Error("coherence_sweep: every parameter list must be nonempty");
  }
  const int sources = static_cast<int>(base.source_count());
  std::vector<SweepRecord> records;
  for (int spatial : spatial_list) {
    for (double bw : temporal_list) {
      for (int m : captures_list) {
        const auto start = std::chrono::steady_clock::now();
        SweepRecord rec;
        rec.spatial_resolution = spatial;
        rec.temporal_resolution = bw;
        rec.captures = m;
        if (m < 1 || m > sources) throw Error("coherence_sweep: captures " + std::to_string(m) + " out of range");
        const SceneConfig scene = with_temporal_resolution(with_spatial_resolution(base, spatial), bw);
        const auto op = MeasurementOperator::build(scene, MultiplexPattern::blocks(sources, m));
        try {
          const auto report = mutual_coherence(op, options.coherence);
          rec.coherence = report.mu;
          rec.coherence_separated = report.mu_separated;
          rec.lower_bound = report.lower_bound;
          const std::size_t c = scene.grid.center_voxel();
          const auto fwhm = psf_fwhm(gram_column(op, c), c);
          rec.psf_fwhm = fwhm.width;
        } catch (const Error& e) {
          if (std::string(e.what()).rfind("coherence undefined", 0) != 0) throw;
          rec.valid = false;
        }
        if (options.record_runtime) {
          rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        records.push_back(rec);
      }
    }
  }
  return records;
}

int sparse_recovery_bound(double mu) {
  if (!(mu > 0.0) || mu > 1.0) throw Error("sparse_recovery_bound: mu must lie in (0, 1]");
  return static_cast<int>(std::floor(0.5 * (1.0 + 1.0 / mu)));
}

}  // namespace twobounce
