// SPDX-License-Identifier: Apache-2.0
#include "twobounce/operator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "rng.hpp"
#include "twobounce/parallel.hpp"

namespace twobounce {

MeasurementOperator MeasurementOperator::build(const SceneConfig& scene, const MultiplexPattern& pattern,
                                               OperatorOptions options) {
  scene.validate();
  if (static_cast<std::size_t>(pattern.sources()) != scene.source_count()) {
    throw Error("pattern has " + std::to_string(pattern.sources()) + " sources, scene has " +
                std::to_string(scene.source_count()));
  }
  for (int m = 0; m < pattern.captures(); ++m) {
    bool any = false;
    for (int k = 0; k < pattern.sources() && !any; ++k) any = pattern.active(m, k);
    if (!any) throw Error("capture " + std::to_string(m) + " has no active source");
  }
  if (scene.grid.size() > std::numeric_limits<std::uint32_t>::max()) throw Error("voxel grid too large");

  MeasurementOperator op;
  op.scene_ = scene;
  op.pattern_ = pattern;
  op.options_ = options;
  op.captures_ = pattern.captures();
  op.detectors_ = scene.detector_count();
  op.sources_ = scene.source_count();
  op.bins_ = scene.time.n_bins;
  op.voxels_ = scene.grid.size();

  const auto sources = scene.sources();
  const auto detectors = scene.detectors();
  const std::size_t n_rays = op.detectors_ * op.sources_;
  op.ray_bin_.assign(n_rays, -1);
  op.ray_weight_.assign(n_rays, 1.0);

  // Traverse each ray once; detectors are independent so they can run in parallel.
  std::vector<std::vector<std::uint32_t>> per_ray(n_rays);
  parallel_for(op.detectors_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < op.sources_; ++k) {
        const std::size_t r = i * op.sources_ + k;
        const Vec3& l = sources[k];
        const Vec3& s = detectors[i];
        if (const auto bin = path_bin(scene.laser_origin, l, s, scene)) op.ray_bin_[r] = *bin;
        if (options.falloff) op.ray_weight_[r] = 1.0 / (l - s).squaredNorm();
        const auto voxels = ray_voxels(scene.grid, l, s);
        per_ray[r].assign(voxels.begin(), voxels.end());
      }
    }
  });

  op.ray_offsets_.assign(n_rays + 1, 0);
  for (std::size_t r = 0; r < n_rays; ++r) op.ray_offsets_[r + 1] = op.ray_offsets_[r] + per_ray[r].size();
  op.ray_voxels_.reserve(op.ray_offsets_.back());
  for (auto& v : per_ray) {
    op.ray_voxels_.insert(op.ray_voxels_.end(), v.begin(), v.end());
    std::vector<std::uint32_t>().swap(v);
  }

  // Transpose of B; ray ids come out sorted because rays are scanned in order.
  op.voxel_offsets_.assign(op.voxels_ + 1, 0);
  for (std::uint32_t j : op.ray_voxels_) ++op.voxel_offsets_[j + 1];
  std::partial_sum(op.voxel_offsets_.begin(), op.voxel_offsets_.end(), op.voxel_offsets_.begin());
  op.voxel_rays_.resize(op.ray_voxels_.size());
  std::vector<std::size_t> cursor(op.voxel_offsets_.begin(), op.voxel_offsets_.end() - 1);
  for (std::size_t r = 0; r < n_rays; ++r) {
    for (std::size_t e = op.ray_offsets_[r]; e < op.ray_offsets_[r + 1]; ++e) {
      op.voxel_rays_[cursor[op.ray_voxels_[e]]++] = static_cast<std::uint32_t>(r);
    }
  }

  op.detector_offsets_.assign(op.detectors_ + 1, 0);
  for (std::size_t i = 0; i < op.detectors_; ++i) {
    const std::size_t begin = op.detector_bins_.size();
    for (std::size_t k = 0; k < op.sources_; ++k) {
      const int b = op.ray_bin_[i * op.sources_ + k];
      if (b >= 0) op.detector_bins_.emplace_back(b, static_cast<std::uint32_t>(k));
    }
    std::sort(op.detector_bins_.begin() + static_cast<std::ptrdiff_t>(begin), op.detector_bins_.end());
    op.detector_offsets_[i + 1] = op.detector_bins_.size();
  }
  return op;
}

std::span<const std::uint32_t> MeasurementOperator::ray(std::size_t detector, std::size_t source) const {
  const std::size_t r = detector * sources_ + source;
  return {ray_voxels_.data() + ray_offsets_[r], ray_offsets_[r + 1] - ray_offsets_[r]};
}

void MeasurementOperator::apply(std::span<const double> f, std::span<double> y) const {
  if (f.size() != cols() || y.size() != rows()) throw Error("apply: vector sizes do not match the operator");
  std::fill(y.begin(), y.end(), 0.0);
  parallel_for(detectors_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (int m = 0; m < captures_; ++m) {
        for (std::size_t k = 0; k < sources_; ++k) {
          if (!pattern_.active(m, static_cast<int>(k))) continue;
          const std::size_t r = i * sources_ + k;
          if (ray_bin_[r] < 0) continue;
          double sum = 0.0;
          for (std::size_t e = ray_offsets_[r]; e < ray_offsets_[r + 1]; ++e) sum += f[ray_voxels_[e]];
          y[row_index(m, i, ray_bin_[r])] += ray_weight_[r] * sum;
        }
      }
    }
  });
}

void MeasurementOperator::apply_adjoint(std::span<const double> y, std::span<double> f) const {
  if (f.size() != cols() || y.size() != rows()) throw Error("apply_adjoint: vector sizes do not match the operator");
  parallel_for(voxels_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      double acc = 0.0;
      for (std::size_t e = voxel_offsets_[j]; e < voxel_offsets_[j + 1]; ++e) {
        const std::size_t r = voxel_rays_[e];
        const int b = ray_bin_[r];
        if (b < 0) continue;
        const std::size_t i = r / sources_;
        const int k = static_cast<int>(r % sources_);
        double gathered = 0.0;
        for (int m = 0; m < captures_; ++m) {
          if (pattern_.active(m, k)) gathered += y[row_index(m, i, b)];
        }
        acc += ray_weight_[r] * gathered;
      }
      f[j] = acc;
    }
  });
}

std::vector<double> MeasurementOperator::flatten(const std::vector<TransientCube>& cubes) const {
  if (cubes.size() != static_cast<std::size_t>(captures_)) {
    throw Error("expected " + std::to_string(captures_) + " cubes, got " + std::to_string(cubes.size()));
  }
  std::vector<double> y;
  y.reserve(rows());
  for (const auto& c : cubes) {
    if (c.detectors() != detectors_ || c.n_t != bins_ || c.n_u != scene_.obs_wall.grid_u) {
      throw Error("cube dimensions do not match the operator");
    }
    y.insert(y.end(), c.values.begin(), c.values.end());
  }
  return y;
}

std::vector<TransientCube> MeasurementOperator::unflatten(std::span<const double> y, CubeKind kind) const {
  if (y.size() != rows()) throw Error("unflatten: vector size does not match the operator");
  std::vector<TransientCube> cubes;
  const std::size_t per = detectors_ * static_cast<std::size_t>(bins_);
  for (int m = 0; m < captures_; ++m) {
    TransientCube c(scene_.obs_wall.grid_u, scene_.obs_wall.grid_v, bins_, kind);
    std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(m * per), per, c.values.begin());
    cubes.push_back(std::move(c));
  }
  return cubes;
}

std::vector<TransientCube> MeasurementOperator::apply(const OccupancyVolume& f) const {
  if (!(f.grid == scene_.grid) || f.values.size() != voxels_) throw Error("apply: volume grid does not match the operator");
  std::vector<double> y(rows());
  apply(f.values, y);
  return unflatten(y, CubeKind::shadow);
}

OccupancyVolume MeasurementOperator::apply_adjoint(const std::vector<TransientCube>& cubes) const {
  const auto y = flatten(cubes);
  OccupancyVolume f = OccupancyVolume::zeros(scene_.grid);
  apply_adjoint(y, f.values);
  return f;
}

std::vector<MeasurementOperator::Entry> MeasurementOperator::column(std::size_t voxel) const {
  if (voxel >= voxels_) throw Error("voxel index " + std::to_string(voxel) + " out of range");
  std::vector<Entry> entries;
  for (std::size_t e = voxel_offsets_[voxel]; e < voxel_offsets_[voxel + 1]; ++e) {
    const std::size_t r = voxel_rays_[e];
    const int b = ray_bin_[r];
    if (b < 0) continue;
    const std::size_t i = r / sources_;
    const int k = static_cast<int>(r % sources_);
    for (int m = 0; m < captures_; ++m) {
      if (pattern_.active(m, k)) entries.push_back({row_index(m, i, b), ray_weight_[r]});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
  std::vector<Entry> merged;
  for (const Entry& en : entries) {
    if (!merged.empty() && merged.back().row == en.row) {
      merged.back().value += en.value;
    } else {
      merged.push_back(en);
    }
  }
  return merged;
}

double MeasurementOperator::column_norm_squared(std::size_t voxel) const {
  double n = 0.0;
  for (const Entry& e : column(voxel)) n += e.value * e.value;
  return n;
}

void MeasurementOperator::GramScratch::clear() {
  for (std::uint32_t j : touched) {
    values[j] = 0.0;
    seen[j] = 0;
  }
  touched.clear();
}

void MeasurementOperator::accumulate_gram_column(std::size_t voxel, GramScratch& scratch) const {
  if (scratch.values.size() != voxels_) {
    scratch.values.assign(voxels_, 0.0);
    scratch.seen.assign(voxels_, 0);
    scratch.touched.clear();
  }
  const std::size_t slice = detectors_ * static_cast<std::size_t>(bins_);
  for (const Entry& entry : column(voxel)) {
    const int m = static_cast<int>(entry.row / slice);
    const std::size_t rem = entry.row % slice;
    const int b = static_cast<int>(rem / detectors_);
    const std::size_t i = rem % detectors_;
    const auto first = detector_bins_.begin() + static_cast<std::ptrdiff_t>(detector_offsets_[i]);
    const auto last = detector_bins_.begin() + static_cast<std::ptrdiff_t>(detector_offsets_[i + 1]);
    auto it = std::lower_bound(first, last, std::make_pair(static_cast<std::int32_t>(b), std::uint32_t{0}));
    for (; it != last && it->first == b; ++it) {
      const std::size_t k = it->second;
      if (!pattern_.active(m, static_cast<int>(k))) continue;
      const std::size_t r = i * sources_ + k;
      const double scale = entry.value * ray_weight_[r];
      for (std::size_t e = ray_offsets_[r]; e < ray_offsets_[r + 1]; ++e) {
        const std::uint32_t j = ray_voxels_[e];
        if (!scratch.seen[j]) {
          scratch.seen[j] = 1;
          scratch.touched.push_back(j);
        }
        scratch.values[j] += scale;
      }
    }
  }
}

std::vector<double> MeasurementOperator::gram_column_values(std::size_t voxel) const {
  GramScratch scratch;
  accumulate_gram_column(voxel, scratch);
  return std::move(scratch.values);
}

std::size_t MeasurementOperator::nonzeros() const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < voxels_; ++j) n += column(j).size();
  return n;
}

MeasurementOperator build_operator(const SceneConfig& scene, const MultiplexPattern& pattern, OperatorOptions options) {
  return MeasurementOperator::build(scene, pattern, options);
}

std::vector<TransientCube> apply(const MeasurementOperator& op, const OccupancyVolume& f) { return op.apply(f); }

OccupancyVolume apply_adjoint(const MeasurementOperator& op, const std::vector<TransientCube>& cubes) {
  return op.apply_adjoint(cubes);
}

OccupancyVolume gram_column(const MeasurementOperator& op, std::size_t voxel) {
  if (voxel >= op.cols()) throw Error("voxel index " + std::to_string(voxel) + " out of range");
  OccupancyVolume v = OccupancyVolume::zeros(op.scene().grid);
  v.values = op.gram_column_values(voxel);
  return v;
}

namespace {

struct PartialCoherence {
  double mu = -1.0;
  double mu_separated = -1.0;
  std::vector<VoxelPair> ties;
};

int chebyshev(const VoxelGrid& grid, std::size_t a, std::size_t b) {
  const auto p = grid.unravel(a);
  const auto q = grid.unravel(b);
  return std::max({std::abs(p[0] - q[0]), std::abs(p[1] - q[1]), std::abs(p[2] - q[2])});
}

void offer(PartialCoherence& acc, double value, VoxelPair pair, std::size_t max_ties) {
  if (value > acc.mu) {
    acc.mu = value;
    acc.ties.assign(1, pair);
  } else if (value == acc.mu && acc.ties.size() < max_ties) {
    acc.ties.push_back(pair);
  }
}

}  // namespace

CoherenceReport mutual_coherence(const MeasurementOperator& op, const CoherenceOptions& options) {
  const std::size_t n = op.cols();
  std::vector<double> norms(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) norms[j] = op.column_norm_squared(j);
  });
  std::vector<std::size_t> nonzero;
  for (std::size_t j = 0; j < n; ++j) {
    if (norms[j] > 0.0) nonzero.push_back(j);
  }
  CoherenceReport report;
  report.nonzero_columns = nonzero.size();
  report.zero_columns = n - nonzero.size();
  if (nonzero.size() < 2) throw Error("coherence undefined: fewer than two nonzero columns");

  const bool sampled = options.mode == CoherenceOptions::Mode::sampled && options.sample_columns < nonzero.size();
  std::vector<std::size_t> scan = nonzero;
  if (sampled) {
    detail::CounterStream rng(options.seed, 0x5eed);
    for (std::size_t a = scan.size() - 1; a > 0; --a) {
      std::swap(scan[a], scan[static_cast<std::size_t>(rng() % (a + 1))]);
    }
    scan.resize(options.sample_columns);
    std::sort(scan.begin(), scan.end());
  }

  const VoxelGrid& grid = op.scene().grid;
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), scan.size()));
  std::vector<PartialCoherence> partial(workers);
  const std::size_t chunk = (scan.size() + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t wb, std::size_t we) {
    for (std::size_t w = wb; w < we; ++w) {
      MeasurementOperator::GramScratch scratch;
      PartialCoherence& acc = partial[w];
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(scan.size(), begin + chunk);
      for (std::size_t s = begin; s < end; ++s) {
        const std::size_t j = scan[s];
        op.accumulate_gram_column(j, scratch);
        std::sort(scratch.touched.begin(), scratch.touched.end());
        for (std::uint32_t other : scratch.touched) {
          // Exact mode visits each unordered pair once.
          if (other == j || (!sampled && other < j) || norms[other] == 0.0) continue;
          const double value = std::min(1.0, std::abs(scratch.values[other]) / std::sqrt(norms[j] * norms[other]));
          const VoxelPair pair{std::min<std::size_t>(j, other), std::max<std::size_t>(j, other)};
          offer(acc, value, pair, options.max_ties);
          if (chebyshev(grid, j, other) >= options.min_separation) acc.mu_separated = std::max(acc.mu_separated, value);
        }
        scratch.clear();
      }
    }
  });

  PartialCoherence total;
  for (const auto& p : partial) {
    if (p.mu < 0.0) continue;
    for (const auto& pair : p.ties) offer(total, p.mu, pair, options.max_ties);
    total.mu_separated = std::max(total.mu_separated, p.mu_separated);
  }
  // Columns with disjoint support never appear in each other's Gram rows.
  report.mu = std::max(0.0, total.mu);
  const int extent = *std::max_element(grid.dims.begin(), grid.dims.end()) - 1;
  report.mu_separated = total.mu_separated >= 0.0 ? total.mu_separated : (extent >= options.min_separation ? 0.0 : -1.0);
  report.argmax_pairs = std::move(total.ties);
  report.lower_bound = sampled;
  return report;
}

Eigen::MatrixXd dense_materialize(const MeasurementOperator& op, std::size_t max_entries) {
  const std::size_t rows = op.rows();
  const std::size_t cols = op.cols();
  if (cols != 0 && rows > max_entries / cols) {
    throw Error("dense materialization of " + std::to_string(rows) + " x " + std::to_string(cols) +
                " exceeds max_entries = " + std::to_string(max_entries));
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t j = 0; j < cols; ++j) {
    for (const auto& e : op.column(j)) {
      dense(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(j)) = e.value;
    }
  }
  return dense;
}

void write_coo(const MeasurementOperator& op, std::ostream& out) {
  std::vector<std::vector<MeasurementOperator::Entry>> columns(op.cols());
  std::size_t nnz = 0;
  for (std::size_t j = 0; j < op.cols(); ++j) {
    columns[j] = op.column(j);
    nnz += columns[j].size();
  }
  out << op.rows() << ' ' << op.cols() << ' ' << nnz << '\n';
  out << std::setprecision(17);
  for (std::size_t j = 0; j < op.cols(); ++j) {
    for (const auto& e : columns[j]) out << e.row << ' ' << j << ' ' << e.value << '\n';
  }
}

}  // namespace twobounce
