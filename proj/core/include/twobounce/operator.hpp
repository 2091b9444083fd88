// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "twobounce/scene.hpp"
#include "twobounce/transient.hpp"
#include "twobounce/volume.hpp"

namespace twobounce {

struct OperatorOptions {
  /// Weight every path by 1/|l-s|^2. Reconstruction leaves this off; the SNR
  /// study turns it on.
  bool falloff = false;
};

/// Sparse two-bounce measurement operator A = P B, stored in factored form.
///
/// B maps a voxel to the (detector, source) rays that cross it; P maps each
/// (capture, detector, active source) to the time bin of that path. Rows are
/// ordered capture-major and then follow the TransientCube layout, so row
/// (m, i, t) = m*n_d*n_t + t*n_d + i. Columns are voxel linear indices.
class MeasurementOperator {
 public:
  struct Entry {
    std::size_t row;
    double value;
  };

  /// Traverses every (detector, source) ray once. Throws Error when the
  /// pattern's source count disagrees with the scene or some capture has no
  /// active source.
  static MeasurementOperator build(const SceneConfig& scene, const MultiplexPattern& pattern,
                                   OperatorOptions options = {});

  const SceneConfig& scene() const { return scene_; }
  const MultiplexPattern& pattern() const { return pattern_; }
  const OperatorOptions& options() const { return options_; }

  std::size_t rows() const { return static_cast<std::size_t>(captures_) * detectors_ * static_cast<std::size_t>(bins_); }
  std::size_t cols() const { return voxels_; }
  int captures() const { return captures_; }
  std::size_t detectors() const { return detectors_; }
  int bins() const { return bins_; }
  std::size_t row_index(int capture, std::size_t detector, int bin) const {
    return (static_cast<std::size_t>(capture) * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(bin)) *
               detectors_ + detector;
  }

  /// Voxels on the ray from source k to detector i (the B factor).
  std::span<const std::uint32_t> ray(std::size_t detector, std::size_t source) const;
  /// Time bin of the path through source k to detector i, or -1 (the P factor).
  int ray_bin(std::size_t detector, std::size_t source) const { return ray_bin_[detector * sources_ + source]; }
  double ray_weight(std::size_t detector, std::size_t source) const { return ray_weight_[detector * sources_ + source]; }

  /// y = A f. `f` has cols() entries, `y` rows() entries (overwritten).
  void apply(std::span<const double> f, std::span<double> y) const;
  /// f = A^T y. `y` has rows() entries, `f` cols() entries (overwritten).
  void apply_adjoint(std::span<const double> y, std::span<double> f) const;

  std::vector<TransientCube> apply(const OccupancyVolume& f) const;
  OccupancyVolume apply_adjoint(const std::vector<TransientCube>& cubes) const;

  /// Nonzeros of column `voxel`, sorted by row with duplicates merged.
  std::vector<Entry> column(std::size_t voxel) const;
  double column_norm_squared(std::size_t voxel) const;
  /// Column `voxel` of A^T A as a flat vector over voxels.
  std::vector<double> gram_column_values(std::size_t voxel) const;

  /// Concatenates per-capture cubes into one rows()-vector, and back.
  std::vector<double> flatten(const std::vector<TransientCube>& cubes) const;
  std::vector<TransientCube> unflatten(std::span<const double> y, CubeKind kind) const;

  /// Number of structural nonzeros in A (merged entries).
  std::size_t nonzeros() const;

  /// Reusable sparse accumulator for Gram columns.
  struct GramScratch {
    std::vector<double> values;
    std::vector<std::uint8_t> seen;
    std::vector<std::uint32_t> touched;
    void clear();
  };
  /// Accumulates Gram column `voxel` into `scratch` (sized on first use); the
  /// indices it wrote are listed in scratch.touched.
  void accumulate_gram_column(std::size_t voxel, GramScratch& scratch) const;

 private:
  SceneConfig scene_;
  MultiplexPattern pattern_;
  OperatorOptions options_;
  int captures_ = 0;
  std::size_t detectors_ = 0;
  std::size_t sources_ = 0;
  int bins_ = 0;
  std::size_t voxels_ = 0;

  // B: CSR over rays r = i*K + k.
  std::vector<std::size_t> ray_offsets_;
  std::vector<std::uint32_t> ray_voxels_;
  std::vector<std::int32_t> ray_bin_;
  std::vector<double> ray_weight_;
  // B^T: CSR over voxels listing ray ids in increasing order.
  std::vector<std::size_t> voxel_offsets_;
  std::vector<std::uint32_t> voxel_rays_;
  // Per detector, its in-axis sources sorted by bin: (bin, source).
  std::vector<std::size_t> detector_offsets_;
  std::vector<std::pair<std::int32_t, std::uint32_t>> detector_bins_;
};

MeasurementOperator build_operator(const SceneConfig& scene, const MultiplexPattern& pattern,
                                   OperatorOptions options = {});
std::vector<TransientCube> apply(const MeasurementOperator& op, const OccupancyVolume& f);
OccupancyVolume apply_adjoint(const MeasurementOperator& op, const std::vector<TransientCube>& cubes);

/// One column of the Gram matrix A^T A (the backprojection PSF of `voxel`).
OccupancyVolume gram_column(const MeasurementOperator& op, std::size_t voxel);

struct CoherenceOptions {
  enum class Mode { exact, sampled };
  Mode mode = Mode::exact;
  /// Sampled mode: number of seeded random columns whose Gram rows are scanned.
  std::size_t sample_columns = 256;
  std::uint64_t seed = 0;
  /// Pairs at Chebyshev index distance >= this count toward `mu_separated`.
  int min_separation = 2;
  std::size_t max_ties = 16;
};

struct VoxelPair {
  std::size_t first;
  std::size_t second;
  bool operator==(const VoxelPair&) const = default;
};

struct CoherenceReport {
  double mu = 0.0;
  /// Maximum over pairs separated by at least `min_separation` voxels; -1 when no such pair exists.
  double mu_separated = -1.0;
  /// Pairs attaining `mu`, capped at `max_ties`.
  std::vector<VoxelPair> argmax_pairs;
  std::size_t nonzero_columns = 0;
  std::size_t zero_columns = 0;
  /// True when computed from a subset of columns; `mu` is then a lower bound.
  bool lower_bound = false;
};

/// max over distinct nonzero columns of |<A_i, A_j>| / (|A_i| |A_j|).
/// Throws Error("coherence undefined") with fewer than two nonzero columns.
CoherenceReport mutual_coherence(const MeasurementOperator& op, const CoherenceOptions& options = {});

/// Full dense A. Throws Error when rows*cols exceeds `max_entries`.
Eigen::MatrixXd dense_materialize(const MeasurementOperator& op, std::size_t max_entries);

/// Coordinate-list text export: "rows cols nnz" then one "row col value" line per nonzero.
void write_coo(const MeasurementOperator& op, std::ostream& out);

}  // namespace twobounce
