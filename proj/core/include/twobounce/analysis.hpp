// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "twobounce/operator.hpp"
#include "twobounce/volume.hpp"

namespace twobounce {

/// Per-voxel SNR over the scene grid.
struct SnrMap {
  VoxelGrid grid;
  std::vector<double> values;
  /// Expected photons in the empty transient, summed over every bin.
  double total_photons = 0.0;

  std::size_t argmax() const;
  double max() const;
  OccupancyVolume as_volume() const;
};

/// S(x) = sqrt(1ᵀ I0 - photons removed when only x is occupied), with 1/r²
/// falloff forced on. Arrivals outside the time axis are not counted.
SnrMap snr_map(const SceneConfig& scene);

/// Shadow-photon SNR: photons removed by x over the Poisson deviation of the
/// remaining light, 1ᵀAδ / sqrt(1ᵀ(I0 - Aδ)). Zero where no ray crosses x.
SnrMap shadow_snr_map(const SceneConfig& scene);

struct Fwhm {
  /// Width per axis in meters.
  std::array<double, 3> width{};
  /// Set when some sample on an axis profile exceeds the center value.
  bool off_peak = false;
};

/// Width of the above-half-maximum run through `center` along each axis, with
/// linear interpolation at the crossings. A run that reaches the grid boundary
/// ends at the outer face of the last voxel.
Fwhm psf_fwhm(const OccupancyVolume& psf, std::size_t center);

struct SweepRecord {
  int spatial_resolution = 0;
  double temporal_resolution = 0.0;  // seconds
  int captures = 0;
  double coherence = 0.0;
  double coherence_separated = -1.0;
  bool lower_bound = false;
  std::array<double, 3> psf_fwhm{};
  bool valid = true;
  double runtime = 0.0;  // seconds
};

struct SweepOptions {
  CoherenceOptions coherence;
  /// Keep per-record wall-clock time; otherwise runtime is 0 so output is reproducible.
  bool record_runtime = false;
};

/// Scene with the observation wall resampled to `spatial` detectors per edge.
/// An edge sampled once (a 2D strip) keeps one sample.
SceneConfig with_spatial_resolution(const SceneConfig& base, int spatial);

/// Scene with the given bin width and a time axis refitted to every arrival.
SceneConfig with_temporal_resolution(const SceneConfig& base, double bin_width);

/// Coherence and centre-voxel PSF width for every (spatial, temporal, captures)
/// combination, in nested input order (spatial outermost). Captures use the
/// contiguous-block pattern. A combination with fewer than two nonzero
/// columns yields a record with valid = false.
std::vector<SweepRecord> coherence_sweep(const SceneConfig& base, const std::vector<int>& spatial_list,
                                         const std::vector<double>& temporal_list,
                                         const std::vector<int>& captures_list, const SweepOptions& options = {});

/// floor(0.5 * (1 + 1/mu)). Throws Error unless 0 < mu <= 1.
int sparse_recovery_bound(double mu);

}  // namespace twobounce
