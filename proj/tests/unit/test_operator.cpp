// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support/scenes.hpp"
#include "twobounce/operator.hpp"
#include "twobounce/transient.hpp"

namespace tb = twobounce;
using tb::Vec3;
using tb::testing::as_vector;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// One source, one detector and a row of three voxels on the ray between them.
tb::SceneConfig single_ray_scene(int voxels) {
  tb::SceneConfig s;
  s.illum_wall.origin = Vec3(2, -0.05, -0.05);
  s.illum_wall.edge_u = Vec3(0, 0, 0.1);
  s.illum_wall.edge_v = Vec3(0, 0.1, 0);
  s.obs_wall = s.illum_wall;
  s.obs_wall.origin = Vec3(0, -0.05, -0.05);
  s.laser_origin = Vec3(1, 0, -2);
  s.camera_origin = s.laser_origin;
  s.grid.origin = Vec3(0.85, -0.05, -0.05);
  s.grid.voxel_size = 0.1;
  s.grid.dims = {voxels, 2, 1};
  s.time.bin_width = 10e-12;
  tb::fit_time_axis(s);
  return s;
}

tb::SceneConfig oracle_scene() { return tb::testing::desk_scene(4, 4, 8, 8, {5, 1, 5}, 0.04, 0.0037); }

}  // namespace

TEST(Operator, Shape) {
  const auto s = oracle_scene();
  const auto op = tb::build_operator(s, tb::MultiplexPattern::blocks(16, 4));
  EXPECT_EQ(op.rows(), 4u * 64u * static_cast<std::size_t>(s.time.n_bins));
  EXPECT_EQ(op.cols(), 25u);
  EXPECT_EQ(op.row_index(1, 3, 2), (1u * static_cast<std::size_t>(s.time.n_bins) + 2u) * 64u + 3u);
}

TEST(Operator, SingleRayColumns) {
  const auto s = single_ray_scene(3);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(1));
  std::optional<std::size_t> row;
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(op.column(s.grid.linear_index(i, 1, 0)).empty());
    const auto on = op.column(s.grid.linear_index(i, 0, 0));
    ASSERT_EQ(on.size(), 1u);
    EXPECT_EQ(on[0].value, 1.0);
    if (row) EXPECT_EQ(on[0].row, *row);
    row = on[0].row;
  }
}

TEST(Operator, OffRayVoxelHasZeroColumn) {
  auto s = single_ray_scene(3);
  s.grid.dims = {3, 3, 1};
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(1));
  EXPECT_TRUE(op.column(s.grid.linear_index(1, 2, 0)).empty());
  EXPECT_EQ(tb::gram_column(op, s.grid.linear_index(1, 2, 0)).count_nonzero(), 0u);
}

TEST(Operator, RejectsPatternMismatch) {
  const auto s = oracle_scene();
  EXPECT_THROW(tb::build_operator(s, tb::MultiplexPattern::identity(3)), tb::Error);
}

TEST(Operator, MatchesDenseOracle) {
  const auto s = oracle_scene();
  for (const auto& p : {tb::MultiplexPattern::identity(16), tb::MultiplexPattern::blocks(16, 3),
                        tb::MultiplexPattern::random(16, 5, 3)}) {
    for (bool falloff : {false, true}) {
      const auto op = tb::build_operator(s, p, {falloff});
      const Eigen::MatrixXd oracle = tb::testing::dense_oracle(s, p, falloff);
      const Eigen::MatrixXd dense = tb::dense_materialize(op, 10'000'000);
      ASSERT_EQ(dense.rows(), oracle.rows());
      ASSERT_EQ(dense.cols(), oracle.cols());
      EXPECT_LE((dense - oracle).cwiseAbs().maxCoeff(), 1e-12 * oracle.cwiseAbs().maxCoeff());
      if (!falloff) {
        for (Eigen::Index j = 0; j < dense.size(); ++j) {
          const double v = dense.data()[j];
          EXPECT_EQ(v, std::round(v));
        }
      }
    }
  }
}

TEST(Operator, ApplyAndAdjointMatchDense) {
  const auto s = oracle_scene();
  const auto p = tb::MultiplexPattern::blocks(16, 4);
  const auto op = tb::build_operator(s, p);
  const Eigen::MatrixXd a = tb::testing::dense_oracle(s, p, false);
  const auto f = random_vector(op.cols(), 1);
  const auto y = random_vector(op.rows(), 2);
  std::vector<double> af(op.rows());
  std::vector<double> aty(op.cols());
  op.apply(f, af);
  op.apply_adjoint(y, aty);
  EXPECT_LE(tb::testing::relative_error(as_vector(af), a * as_vector(f)), 1e-12);
  EXPECT_LE(tb::testing::relative_error(as_vector(aty), a.transpose() * as_vector(y)), 1e-12);
}

TEST(Operator, AdjointIdentity) {
  const auto s = tb::testing::desk_scene(4, 4, 8, 8, {5, 5, 5}, 0.04);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::strided(16, 3), {true});
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto f = random_vector(op.cols(), 2 * t);
    const auto y = random_vector(op.rows(), 2 * t + 1);
    std::vector<double> af(op.rows());
    std::vector<double> aty(op.cols());
    op.apply(f, af);
    op.apply_adjoint(y, aty);
    const double lhs = as_vector(af).dot(as_vector(y));
    const double rhs = as_vector(f).dot(as_vector(aty));
    EXPECT_LE(std::abs(lhs - rhs) / (as_vector(af).norm() * as_vector(y).norm()), 1e-12);
  }
}

TEST(Operator, ZeroInputs) {
  const auto s = oracle_scene();
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(16));
  const auto cubes = tb::apply(op, tb::OccupancyVolume::zeros(s.grid));
  ASSERT_EQ(cubes.size(), 16u);
  for (const auto& c : cubes) EXPECT_EQ(c.total(), 0.0);
  EXPECT_EQ(tb::apply_adjoint(op, cubes).count_nonzero(), 0u);
}

TEST(Operator, GridMismatchThrows) {
  const auto s = oracle_scene();
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(16));
  tb::VoxelGrid other = s.grid;
  other.dims = {2, 2, 2};
  EXPECT_THROW(tb::apply(op, tb::OccupancyVolume::zeros(other)), tb::Error);
  std::vector<tb::TransientCube> few(3, tb::TransientCube::for_scene(s, tb::CubeKind::shadow));
  EXPECT_THROW(tb::apply_adjoint(op, few), tb::Error);
}

TEST(Operator, IndicatorResponseIsTheShadowTransient) {
  // A single occupied voxel blocks exactly the rays A assigns to its column, so
  // A delta equals i0 - i_l for every capture.
  const auto s = tb::testing::desk_scene(4, 4, 8, 8, {5, 5, 5}, 0.04, 0.0021);
  const auto p = tb::MultiplexPattern::blocks(16, 4);
  const auto op = tb::build_operator(s, p);
  const auto voxel = s.grid.linear_index(2, 1, 3);
  const auto occ = tb::OccupancyVolume::indicator(s.grid, voxel);
  const auto response = tb::apply(op, occ);
  for (int m = 0; m < p.captures(); ++m) {
    const auto row = p.row(m);
    const auto shadow = tb::shadow_transient(tb::empty_transient(s, row), tb::light_transient(s, occ, row));
    EXPECT_EQ(response[static_cast<std::size_t>(m)].values, shadow.values);
  }
}

TEST(Operator, TwoVoxelsOnOneRayCountTwice) {
  const auto s = single_ray_scene(3);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(1));
  auto f = tb::OccupancyVolume::zeros(s.grid);
  for (std::size_t v = 0; v < f.size(); ++v) {
    if (!op.column(v).empty()) f.values[v] = 1.0;
  }
  const auto y = tb::apply(op, f);
  EXPECT_EQ(y[0].total(), 3.0);
  double peak = 0.0;
  for (double v : y[0].values) peak = std::max(peak, v);
  EXPECT_EQ(peak, 3.0);
}

TEST(Operator, BackprojectedIndicatorPeaksAtVoxel) {
  const auto s = tb::testing::desk_scene(4, 4, 8, 8, {5, 5, 5}, 0.04);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(16));
  for (std::size_t v : {s.grid.center_voxel(), s.grid.linear_index(1, 3, 2)}) {
    const auto psf = tb::apply_adjoint(op, tb::apply(op, tb::OccupancyVolume::indicator(s.grid, v)));
    const auto it = std::max_element(psf.values.begin(), psf.values.end());
    EXPECT_EQ(static_cast<std::size_t>(it - psf.values.begin()), v);
  }
}

TEST(Operator, ColumnCountMatchesReachingRays) {
  const auto s = tb::testing::desk_scene(4, 4, 8, 8, {5, 5, 5}, 0.04, 0.0011);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(16));
  const auto sources = s.sources();
  const auto detectors = s.detectors();
  for (std::size_t v = 0; v < s.grid.size(); v += 11) {
    std::size_t expected = 0;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      for (std::size_t i = 0; i < detectors.size(); ++i) {
        const auto hit = tb::testing::brute_ray_voxels(s.grid, sources[k], detectors[i]);
        if (std::find(hit.begin(), hit.end(), v) != hit.end()) ++expected;
      }
    }
    EXPECT_EQ(op.column(v).size(), expected);
  }
}

TEST(Gram, MatchesDenseAndIsSymmetric) {
  const auto s = oracle_scene();
  const auto p = tb::MultiplexPattern::blocks(16, 2);
  const auto op = tb::build_operator(s, p);
  const Eigen::MatrixXd a = tb::testing::dense_oracle(s, p, false);
  const Eigen::MatrixXd g = a.transpose() * a;
  EXPECT_TRUE(g.isApprox(g.transpose()));
  for (std::size_t v = 0; v < op.cols(); ++v) {
    const auto col = tb::gram_column(op, v);
    EXPECT_DOUBLE_EQ(col.values[v], op.column_norm_squared(v));
    for (std::size_t w = 0; w < op.cols(); ++w) {
      EXPECT_NEAR(col.values[w], g(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(v)), 1e-12 * g.maxCoeff());
    }
  }
  EXPECT_THROW(tb::gram_column(op, op.cols()), tb::Error);
}

TEST(Coherence, MatchesDenseNormalizedGram) {
  const auto s = oracle_scene();
  for (int m : {1, 4, 16}) {
    const auto p = tb::MultiplexPattern::blocks(16, m);
    const auto op = tb::build_operator(s, p);
    const Eigen::MatrixXd a = tb::testing::dense_oracle(s, p, false);
    double mu = 0.0;
    double mu_sep = -1.0;
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
        const double ni = a.col(i).norm();
        const double nj = a.col(j).norm();
        if (ni == 0.0 || nj == 0.0) continue;
        const double c = std::abs(a.col(i).dot(a.col(j))) / (ni * nj);
        mu = std::max(mu, c);
        const auto x = s.grid.unravel(static_cast<std::size_t>(i));
        const auto y = s.grid.unravel(static_cast<std::size_t>(j));
        int cheb = 0;
        for (int k = 0; k < 3; ++k) cheb = std::max(cheb, std::abs(x[static_cast<std::size_t>(k)] - y[static_cast<std::size_t>(k)]));
        if (cheb >= 2) mu_sep = std::max(mu_sep, c);
      }
    }
    const auto report = tb::mutual_coherence(op);
    EXPECT_NEAR(report.mu, mu, 1e-12);
    EXPECT_NEAR(report.mu_separated, mu_sep, 1e-12);
    EXPECT_FALSE(report.lower_bound);
    EXPECT_FALSE(report.argmax_pairs.empty());
    EXPECT_LE(report.argmax_pairs.size(), 16u);
  }
}

TEST(Coherence, IdenticalColumnsGiveOne) {
  const auto s = single_ray_scene(3);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(1));
  const auto report = tb::mutual_coherence(op);
  EXPECT_DOUBLE_EQ(report.mu, 1.0);
  EXPECT_EQ(report.nonzero_columns, 3u);
}

TEST(Coherence, OrthogonalColumnsGiveZero) {
  // One source, two detectors: the two rays cross disjoint voxels of a thin
  // column, so their columns share no row.
  tb::SceneConfig s = single_ray_scene(1);
  s.obs_wall.origin = Vec3(0, -0.05, -0.5);
  s.obs_wall.edge_u = Vec3(0, 0, 1.0);
  s.obs_wall.grid_u = 2;
  s.grid.origin = Vec3(0.1, -0.05, -0.5);
  s.grid.dims = {1, 1, 10};
  tb::fit_time_axis(s);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(1));
  const auto report = tb::mutual_coherence(op);
  EXPECT_EQ(report.nonzero_columns, 2u);
  EXPECT_EQ(report.mu, 0.0);
  EXPECT_EQ(tb::gram_column(op, s.grid.linear_index(0, 0, 2)).values[s.grid.linear_index(0, 0, 7)], 0.0);
}

TEST(Coherence, UndefinedWithFewerThanTwoColumns) {
  const auto s = single_ray_scene(1);
  auto one = s;
  one.grid.dims = {1, 1, 1};
  one.grid.origin = Vec3(0.95, -0.05, -0.05);
  const auto op = tb::build_operator(one, tb::MultiplexPattern::identity(1));
  try {
    tb::mutual_coherence(op);
    FAIL();
  } catch (const tb::Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("coherence undefined", 0), 0u);
  }
}

TEST(Coherence, SampledModeIsALowerBound) {
  const auto s = tb::testing::desk_scene(4, 4, 8, 8, {5, 5, 5}, 0.04);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::blocks(16, 2));
  const auto exact = tb::mutual_coherence(op);
  tb::CoherenceOptions o;
  o.mode = tb::CoherenceOptions::Mode::sampled;
  o.sample_columns = 20;
  o.seed = 5;
  const auto sampled = tb::mutual_coherence(op, o);
  EXPECT_TRUE(sampled.lower_bound);
  EXPECT_LE(sampled.mu, exact.mu + 1e-15);
  EXPECT_EQ(tb::mutual_coherence(op, o).mu, sampled.mu);
}

TEST(Coherence, RefiningBinsNeverIncreasesCoherence) {
  auto coarse = tb::testing::desk_scene(4, 4, 8, 8, {5, 1, 5}, 0.04, 0.0037);
  coarse.time.bin_width = 40e-12;
  tb::fit_time_axis(coarse);
  auto fine = coarse;
  fine.time.bin_width = 10e-12;
  fine.time.n_bins = coarse.time.n_bins * 4;
  const auto p = tb::MultiplexPattern::blocks(16, 1);
  const double mu_coarse = tb::mutual_coherence(tb::build_operator(coarse, p)).mu;
  const double mu_fine = tb::mutual_coherence(tb::build_operator(fine, p)).mu;
  EXPECT_LE(mu_fine, mu_coarse + 1e-15);
}

TEST(Dense, SingleVoxelOnRay) {
  auto s = single_ray_scene(1);
  s.grid.dims = {1, 1, 1};
  s.grid.origin = Vec3(0.95, -0.05, -0.05);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::identity(1));
  const auto a = tb::dense_materialize(op, 1000);
  ASSERT_EQ(a.cols(), 1);
  EXPECT_EQ(a.sum(), 1.0);
  EXPECT_EQ(a.maxCoeff(), 1.0);
  EXPECT_THROW(tb::dense_materialize(op, 0), tb::Error);
}

TEST(Dense, CooExportMatches) {
  const auto s = oracle_scene();
  const auto op = tb::build_operator(s, tb::MultiplexPattern::blocks(16, 2));
  std::ostringstream out;
  tb::write_coo(op, out);
  std::istringstream in(out.str());
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t nnz = 0;
  in >> rows >> cols >> nnz;
  EXPECT_EQ(rows, op.rows());
  EXPECT_EQ(cols, op.cols());
  EXPECT_EQ(nnz, op.nonzeros());
  const auto dense = tb::dense_materialize(op, 10'000'000);
  double total = 0.0;
  for (std::size_t e = 0; e < nnz; ++e) {
    std::size_t r = 0;
    std::size_t c = 0;
    double v = 0.0;
    in >> r >> c >> v;
    EXPECT_DOUBLE_EQ(dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), v);
    total += v;
  }
  EXPECT_DOUBLE_EQ(total, dense.sum());
}
