// SPDX-License-Identifier: Apache-2.0
#include "twobounce/recon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "twobounce/io.hpp"

namespace twobounce {

const char* to_string(ReconMethod method) {
  switch (method) {
    case ReconMethod::bp: return "bp";
    case ReconMethod::fbp: return "fbp";
    case ReconMethod::carve: return "carve";
  }
  return "unknown";
}

namespace {

void require_nonnegative(const std::vector<TransientCube>& cubes) {
  for (std::size_t m = 0; m < cubes.size(); ++m) {
    for (double v : cubes[m].values) {
      if (v < 0.0) throw Error("backproject: capture " + std::to_string(m) + " has a negative bin; clamp it first");
    }
  }
}

Provenance provenance_of(const MeasurementOperator& op, std::optional<std::uint64_t> seed) {
  return {scene_hash(op.scene()), pattern_hash(op.pattern()), seed};
}

}  // namespace

Reconstruction backproject(const MeasurementOperator& op, const std::vector<TransientCube>& shadow_cubes,
                           std::optional<std::uint64_t> noise_seed) {
  require_nonnegative(shadow_cubes);
  return {op.apply_adjoint(shadow_cubes), ReconMethod::bp, provenance_of(op, noise_seed)};
}

SceneConfig intensity_only_scene(const SceneConfig& scene) {
  SceneConfig out = scene;
  out.time.bin_width = scene.time.bin_width * scene.time.n_bins;
  out.time.n_bins = 1;
  return out;
}

TransientCube collapse_time(const TransientCube& cube) {
  TransientCube out(cube.n_u, cube.n_v, 1, cube.kind);
  out.counts = cube.counts;
  for (int t = 0; t < cube.n_t; ++t) {
    for (std::size_t i = 0; i < cube.detectors(); ++i) out.values[i] += cube.at(i, t);
  }
  return out;
}

Reconstruction backproject_intensity(const MeasurementOperator& op, const std::vector<TransientCube>& shadow_cubes,
                                     std::optional<std::uint64_t> noise_seed) {
  if (op.bins() != 1) throw Error("backproject_intensity: operator must have a single time bin");
  require_nonnegative(shadow_cubes);
  std::vector<TransientCube> collapsed;
  collapsed.reserve(shadow_cubes.size());
  for (const auto& c : shadow_cubes) collapsed.push_back(collapse_time(c));
  return {op.apply_adjoint(collapsed), ReconMethod::bp, provenance_of(op, noise_seed)};
}

OccupancyVolume laplacian_filter(const OccupancyVolume& volume) {
  const VoxelGrid& g = volume.grid;
  const auto& d = g.dims;
  const double h2 = g.voxel_size * g.voxel_size;
  OccupancyVolume out = OccupancyVolume::zeros(g);
  auto value = [&](int i, int j, int k) {
    i = std::clamp(i, 0, d[0] - 1);
    j = std::clamp(j, 0, d[1] - 1);
    k = std::clamp(k, 0, d[2] - 1);
    return volume.at(i, j, k);
  };
  for (int k = 0; k < d[2]; ++k) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = 0; i < d[0]; ++i) {
        const double c = volume.at(i, j, k);
        double lap = 0.0;
        if (d[0] > 1) lap += value(i - 1, j, k) + value(i + 1, j, k) - 2.0 * c;
        if (d[1] > 1) lap += value(i, j - 1, k) + value(i, j + 1, k) - 2.0 * c;
        if (d[2] > 1) lap += value(i, j, k - 1) + value(i, j, k + 1) - 2.0 * c;
        out.at(i, j, k) = -lap / h2;
      }
    }
  }
  return out;
}

Reconstruction laplacian_filter(const Reconstruction& rec) {
  return {laplacian_filter(rec.volume), ReconMethod::fbp, rec.provenance};
}

namespace {

double otsu_split(const std::vector<double>& values, double lo, double hi) {
  constexpr int kBins = 256;
  std::array<double, kBins> hist{};
  const double width = (hi - lo) / kBins;
  for (double v : values) {
    const int b = std::min(kBins - 1, static_cast<int>((v - lo) / width));
    hist[static_cast<std::size_t>(b)] += 1.0;
  }
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int b = 0; b < kBins; ++b) sum_all += b * hist[static_cast<std::size_t>(b)];

  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int split = 0;
  for (int b = 0; b < kBins - 1; ++b) {
    w0 += hist[static_cast<std::size_t>(b)];
    sum0 += b * hist[static_cast<std::size_t>(b)];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      split = b;
    }
  }
  // Voxels in bins <= split fall below the threshold.
  return lo + (split + 1) * width;
}

}  // namespace

OccupancyVolume threshold(const OccupancyVolume& volume, ThresholdMethod method, double param) {
  OccupancyVolume out = OccupancyVolume::empty_binary(volume.grid);
  if (volume.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(volume.values.begin(), volume.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > 0.0)) return out;

  if (method == ThresholdMethod::fraction_of_max) {
    const double cut = param * hi;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (volume.values[i] >= cut && volume.values[i] >= 0.0) out.values[i] = 1.0;
    }
    return out;
  }
  if (hi == lo) {
    std::fill(out.values.begin(), out.values.end(), 1.0);
    return out;
  }
  const double cut = otsu_split(volume.values, lo, hi);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (volume.values[i] >= cut) out.values[i] = 1.0;
  }
  return out;
}

OccupancyVolume threshold(const Reconstruction& rec, ThresholdMethod method, double param) {
  return threshold(rec.volume, method, param);
}

std::vector<std::uint8_t> shadow_mask(const IntensityImage& empty, const IntensityImage& measured) {
  if (empty.values.size() != measured.values.size()) throw Error("shadow_mask: image sizes differ");
  std::vector<std::uint8_t> mask(empty.values.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = empty.values[i] <= 0.0 || measured.values[i] < 0.5 * empty.values[i] ? 1 : 0;
  }
  return mask;
}

OccupancyVolume voxel_carve(const SceneConfig& scene, const std::vector<std::vector<std::uint8_t>>& masks) {
  if (masks.size() != scene.source_count()) {
    throw Error("voxel_carve: got " + std::to_string(masks.size()) + " masks for " +
                std::to_string(scene.source_count()) + " sources");
  }
  const std::size_t n_det = scene.detector_count();
  for (const auto& m : masks) {
    if (m.size() != n_det) throw Error("voxel_carve: mask size does not match the detector count");
  }
  const auto sources = scene.sources();
  const auto detectors = scene.detectors();
  std::vector<std::uint8_t> lit(scene.grid.size(), 0);
  for (std::size_t k = 0; k < sources.size(); ++k) {
    for (std::size_t i = 0; i < n_det; ++i) {
      const bool shadowed = masks[k][i] != 0;
      if (shadowed) continue;
      for (std::size_t v : ray_voxels(scene.grid, sources[k], detectors[i])) lit[v] = 1;
    }
  }
  OccupancyVolume hull = OccupancyVolume::empty_binary(scene.grid);
  for (std::size_t v = 0; v < hull.size(); ++v) hull.values[v] = lit[v] ? 0.0 : 1.0;
  return hull;
}

double iou(const OccupancyVolume& a, const OccupancyVolume& b) {
  if (!(a.grid == b.grid) || a.size() != b.size()) throw Error("iou: volumes are on different grids");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.values[i] != 0.0;
    const bool y = b.values[i] != 0.0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace twobounce
