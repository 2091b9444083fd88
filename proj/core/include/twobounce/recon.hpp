// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twobounce/operator.hpp"
#include "twobounce/transient.hpp"
#include "twobounce/volume.hpp"

namespace twobounce {

enum class ReconMethod : std::uint8_t { bp, fbp, carve };

const char* to_string(ReconMethod method);

struct Provenance {
  std::string scene_hash;
  std::string pattern_hash;
  std::optional<std::uint64_t> noise_seed;

  bool operator==(const Provenance&) const = default;
};

struct Reconstruction {
  OccupancyVolume volume;
  ReconMethod method = ReconMethod::bp;
  Provenance provenance;
};

/// Aᵀ applied to the capture cubes. Throws Error on a negative bin; clamp noisy
/// shadow cubes first.
Reconstruction backproject(const MeasurementOperator& op, const std::vector<TransientCube>& shadow_cubes,
                           std::optional<std::uint64_t> noise_seed = std::nullopt);

/// Scene whose time axis is a single bin spanning the same window. Its operator
/// is the intensity-only counterpart of the original one.
SceneConfig intensity_only_scene(const SceneConfig& scene);

/// Sums each cube over time into a one-bin cube of the same kind.
TransientCube collapse_time(const TransientCube& cube);

/// Backprojection with the time dimension discarded. `op` must be built on
/// intensity_only_scene(...); the cubes may have any bin count.
Reconstruction backproject_intensity(const MeasurementOperator& op, const std::vector<TransientCube>& shadow_cubes,
                                     std::optional<std::uint64_t> noise_seed = std::nullopt);

/// Negated 6-neighbour Laplacian divided by voxel_size², replicate padding.
/// Axes of length 1 are left out of the stencil.
Reconstruction laplacian_filter(const Reconstruction& rec);
OccupancyVolume laplacian_filter(const OccupancyVolume& volume);

enum class ThresholdMethod : std::uint8_t { fraction_of_max, otsu };

/// fraction_of_max keeps v >= param * max; otsu keeps v above the 256-bin
/// between-class-variance split and ignores `param`. A volume whose maximum is
/// not positive thresholds to an empty occupancy.
OccupancyVolume threshold(const OccupancyVolume& volume, ThresholdMethod method, double param = 0.5);
OccupancyVolume threshold(const Reconstruction& rec, ThresholdMethod method, double param = 0.5);

/// Per-pixel shadow flag (1 = shadowed): measured < 0.5 * empty. Pixels the
/// empty image never reaches count as shadowed.
std::vector<std::uint8_t> shadow_mask(const IntensityImage& empty, const IntensityImage& measured);

/// Hard visual hull from one mask per source: every voxel crossed by a ray
/// that lands on a lit pixel is carved away. Voxels no ray crosses survive.
/// Throws Error when the mask count or size disagrees with the scene.
OccupancyVolume voxel_carve(const SceneConfig& scene, const std::vector<std::vector<std::uint8_t>>& masks);

/// |a and b| / |a or b|; 1 when both are empty. Throws Error on grid mismatch.
double iou(const OccupancyVolume& a, const OccupancyVolume& b);

}  // namespace twobounce
