// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "twobounce/scene.hpp"
#include "twobounce/volume.hpp"

namespace twobounce {

enum class CubeKind : std::uint8_t { empty = 0, light = 1, shadow = 2 };

/// Space-time measurement for one capture: n_u x n_v detectors by n_t time bins.
/// Linear layout is u + n_u*v + n_u*n_v*t, i.e. one detector-major slice per bin.
/// `counts` marks integer photon counts (sampled) versus expected rates.
struct TransientCube {
  int n_u = 0;
  int n_v = 0;
  int n_t = 0;
  CubeKind kind = CubeKind::empty;
  bool counts = false;
  std::vector<double> values;

  TransientCube() = default;
  TransientCube(int nu, int nv, int nt, CubeKind k)
      : n_u(nu), n_v(nv), n_t(nt), kind(k),
        values(static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv) * static_cast<std::size_t>(nt), 0.0) {}
  static TransientCube for_scene(const SceneConfig& scene, CubeKind kind);

  std::size_t detectors() const { return static_cast<std::size_t>(n_u) * static_cast<std::size_t>(n_v); }
  std::size_t size() const { return values.size(); }
  std::size_t index(std::size_t detector, int t) const { return detector + detectors() * static_cast<std::size_t>(t); }
  double& at(std::size_t detector, int t) { return values[index(detector, t)]; }
  double at(std::size_t detector, int t) const { return values[index(detector, t)]; }
  bool same_shape(const TransientCube& other) const {
    return n_u == other.n_u && n_v == other.n_v && n_t == other.n_t;
  }
  double total() const;

  bool operator==(const TransientCube&) const = default;
};

/// M x K binary assignment of virtual sources to captures.
class MultiplexPattern {
 public:
  MultiplexPattern() = default;
  /// `entries` is row-major (capture-major). Throws Error when M > K or some
  /// source is never used.
  MultiplexPattern(int captures, int sources, std::vector<std::uint8_t> entries);

  static MultiplexPattern identity(int sources);
  /// Contiguous blocks: capture m gets sources [floor(mK/M), floor((m+1)K/M)).
  static MultiplexPattern blocks(int sources, int captures);
  /// Source k goes to capture k mod M.
  static MultiplexPattern strided(int sources, int captures);
  /// Independent fair coin per entry; any unused source is then given a random capture.
  static MultiplexPattern random(int sources, int captures, std::uint64_t seed);

  int captures() const { return captures_; }
  int sources() const { return sources_; }
  bool active(int capture, int source) const {
    return entries_[static_cast<std::size_t>(capture) * static_cast<std::size_t>(sources_) +
                    static_cast<std::size_t>(source)] != 0;
  }
  std::vector<std::uint8_t> row(int capture) const;
  std::span<const std::uint8_t> entries() const { return entries_; }

  bool operator==(const MultiplexPattern&) const = default;

 private:
  int captures_ = 0;
  int sources_ = 0;
  std::vector<std::uint8_t> entries_;
};

/// Transient with nothing in the hidden volume for the sources switched on in
/// `pattern_row`. Each (source, detector) path deposits alpha (or
/// alpha/|l-s|^2 with falloff) in a single time bin; arrivals outside the time
/// axis are dropped.
TransientCube empty_transient(const SceneConfig& scene, std::span<const std::uint8_t> pattern_row);

/// Exact 0/1 visibility between l and s through a binary occupancy.
int visibility(const OccupancyVolume& occ, const Vec3& l, const Vec3& s);

/// Like empty_transient, with each path multiplied by its visibility.
TransientCube light_transient(const SceneConfig& scene, const OccupancyVolume& occ,
                              std::span<const std::uint8_t> pattern_row);

/// Elementwise empty - light. Throws Error on shape mismatch.
TransientCube shadow_transient(const TransientCube& empty, const TransientCube& light);

/// Copy with negative bins set to zero.
TransientCube clamp_nonnegative(const TransientCube& cube);

/// Copy with every bin multiplied by `factor`.
TransientCube scaled(const TransientCube& cube, double factor);

/// capture m = sum_k pattern[m,k] * cube_k. Throws Error when the cube count
/// differs from the pattern's source count or the shapes differ.
std::vector<TransientCube> multiplex(const std::vector<TransientCube>& per_source_cubes,
                                     const MultiplexPattern& pattern);

/// Independent Poisson draw per bin using the bin value as rate. Every bin has
/// its own counter-based stream keyed by (seed, bin index), so the result does
/// not depend on evaluation order. Throws Error on negative rates.
TransientCube poisson_sample(const TransientCube& cube, std::uint64_t seed);

/// Convolves each detector's time profile with a normalized Gaussian of the
/// given full width at half maximum (seconds). Models detector jitter.
TransientCube gaussian_time_blur(const TransientCube& cube, double fwhm_seconds, double bin_width);

/// Time-integrated n_u x n_v image, index u + n_u*v.
struct IntensityImage {
  int n_u = 0;
  int n_v = 0;
  std::vector<double> values;

  bool operator==(const IntensityImage&) const = default;
};

IntensityImage intensity_projection(const TransientCube& cube);

}  // namespace twobounce
