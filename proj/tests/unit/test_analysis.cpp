// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support/scenes.hpp"
#include "twobounce/analysis.hpp"

namespace tb = twobounce;
using tb::Vec3;

namespace {

// One source 2 m from one detector; no voxel of the grid touches the ray.
tb::SceneConfig off_ray_scene(double alpha) {
  tb::SceneConfig s;
  s.illum_wall.origin = Vec3(2, -0.05, -0.05);
  s.illum_wall.edge_u = Vec3(0, 0, 0.1);
  s.illum_wall.edge_v = Vec3(0, 0.1, 0);
  s.obs_wall = s.illum_wall;
  s.obs_wall.origin = Vec3(0, -0.05, -0.05);
  s.laser_origin = Vec3(2, 0, -1);
  s.camera_origin = s.laser_origin;
  s.grid.origin = Vec3(0.9, 0.3, 0.3);
  s.grid.voxel_size = 0.1;
  s.grid.dims = {2, 2, 2};
  s.laser_intensity = alpha;
  s.time.bin_width = 10e-12;
  tb::fit_time_axis(s);
  return s;
}

tb::OccupancyVolume gaussian_psf(double sigma, std::array<int, 3> dims, std::size_t& center) {
  tb::VoxelGrid g;
  g.dims = dims;
  g.voxel_size = 0.01;
  auto v = tb::OccupancyVolume::zeros(g);
  const int ci = dims[0] / 2;
  const int cj = dims[1] / 2;
  const int ck = dims[2] / 2;
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const double r2 = (i - ci) * (i - ci) + (j - cj) * (j - cj) + (k - ck) * (k - ck);
        v.at(i, j, k) = std::exp(-r2 / (2.0 * sigma * sigma));
      }
    }
  }
  center = g.linear_index(ci, cj, ck);
  return v;
}

tb::SceneConfig sweep_base() { return tb::testing::desk_scene(4, 4, 6, 6, {4, 1, 4}, 0.04, 0.0023); }

}  // namespace

TEST(Snr, UncoveredVoxelsSeeTheWholeBudget) {
  const auto s = off_ray_scene(400.0);
  const auto map = tb::snr_map(s);
  EXPECT_DOUBLE_EQ(map.total_photons, 100.0);
  for (double v : map.values) EXPECT_DOUBLE_EQ(v, 10.0);
  for (double v : tb::shadow_snr_map(s).values) EXPECT_EQ(v, 0.0);
}

TEST(Snr, MatchesBruteForceBudget) {
  auto s = tb::testing::desk_scene(3, 3, 5, 5, {4, 4, 4}, 0.05, 0.0019);
  s.laser_intensity = 3.0;
  const auto sources = s.sources();
  const auto detectors = s.detectors();
  double total = 0.0;
  std::vector<double> removed(s.grid.size(), 0.0);
  for (const Vec3& l : sources) {
    for (const Vec3& d : detectors) {
      const double w = 3.0 / (l - d).squaredNorm();
      total += w;
      for (std::size_t v : tb::testing::brute_ray_voxels(s.grid, l, d)) removed[v] += w;
    }
  }
  const auto literal = tb::snr_map(s);
  const auto shadow = tb::shadow_snr_map(s);
  EXPECT_NEAR(literal.total_photons, total, 1e-12 * total);
  for (std::size_t v = 0; v < removed.size(); ++v) {
    EXPECT_NEAR(literal.values[v], std::sqrt(total - removed[v]), 1e-9);
    EXPECT_LE(literal.values[v], std::sqrt(total) + 1e-12);
    const double expected = removed[v] > 0.0 ? removed[v] / std::sqrt(total - removed[v]) : 0.0;
    EXPECT_NEAR(shadow.values[v], expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(Snr, ArgmaxAndVolume) {
  const auto s = tb::testing::desk_scene(3, 3, 5, 5, {4, 4, 4}, 0.05);
  const auto map = tb::shadow_snr_map(s);
  const auto vol = map.as_volume();
  EXPECT_EQ(vol.values, map.values);
  EXPECT_DOUBLE_EQ(map.values[map.argmax()], map.max());
}

TEST(Fwhm, SingleVoxelPeak) {
  tb::VoxelGrid g;
  g.dims = {5, 5, 5};
  g.voxel_size = 0.02;
  const auto psf = tb::OccupancyVolume::indicator(g, g.linear_index(2, 2, 2));
  const auto w = tb::psf_fwhm(psf, g.linear_index(2, 2, 2));
  for (double x : w.width) EXPECT_NEAR(x, 0.02, 1e-15);
  EXPECT_FALSE(w.off_peak);
}

TEST(Fwhm, GaussianSigmaTwo) {
  std::size_t c = 0;
  const auto psf = gaussian_psf(2.0, {41, 41, 41}, c);
  const auto w = tb::psf_fwhm(psf, c);
  const double expected = 2.0 * std::sqrt(2.0 * std::log(2.0)) * 2.0 * 0.01;
  for (double x : w.width) EXPECT_NEAR(x, expected, 0.05 * expected);
}

TEST(Fwhm, AtLeastOneVoxelAndFlagsOffPeak) {
  tb::VoxelGrid g;
  g.dims = {7, 1, 1};
  g.voxel_size = 1.0;
  auto psf = tb::OccupancyVolume::zeros(g);
  psf.values = {0.0, 0.2, 0.6, 1.0, 0.9, 1.5, 0.0};
  const auto w = tb::psf_fwhm(psf, 3);
  EXPECT_TRUE(w.off_peak);
  EXPECT_GE(w.width[0], 1.0);
  EXPECT_EQ(w.width[1], 1.0);  // one-sample axis
  EXPECT_THROW(tb::psf_fwhm(psf, 7), tb::Error);
}

TEST(Fwhm, RunToBoundaryEndsAtOuterFace) {
  tb::VoxelGrid g;
  g.dims = {3, 1, 1};
  auto psf = tb::OccupancyVolume::zeros(g);
  psf.values = {1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(tb::psf_fwhm(psf, 1).width[0], 3.0);
}

TEST(SparseBound, Examples) {
  EXPECT_EQ(tb::sparse_recovery_bound(1.0), 1);
  EXPECT_EQ(tb::sparse_recovery_bound(0.3), 2);
  EXPECT_EQ(tb::sparse_recovery_bound(0.01), 50);
  EXPECT_THROW(tb::sparse_recovery_bound(0.0), tb::Error);
  EXPECT_THROW(tb::sparse_recovery_bound(1.5), tb::Error);
}

TEST(SparseBound, NonincreasingInMu) {
  int prev = tb::sparse_recovery_bound(0.001);
  for (int i = 2; i <= 1000; ++i) {
    const int b = tb::sparse_recovery_bound(0.001 * i);
    EXPECT_LE(b, prev);
    prev = b;
  }
}

TEST(Sweep, SingleCombinationMatchesDirectCall) {
  const auto base = sweep_base();
  const auto records = tb::coherence_sweep(base, {6}, {20e-12}, {2});
  ASSERT_EQ(records.size(), 1u);
  const auto scene = tb::with_temporal_resolution(tb::with_spatial_resolution(base, 6), 20e-12);
  const auto op = tb::build_operator(scene, tb::MultiplexPattern::blocks(16, 2));
  const auto direct = tb::mutual_coherence(op);
  EXPECT_EQ(records[0].coherence, direct.mu);
  EXPECT_EQ(records[0].coherence_separated, direct.mu_separated);
  EXPECT_TRUE(records[0].valid);
  const auto c = scene.grid.center_voxel();
  const auto fwhm = tb::psf_fwhm(tb::gram_column(op, c), c);
  EXPECT_EQ(records[0].psf_fwhm, fwhm.width);
  EXPECT_EQ(records[0].runtime, 0.0);
}

TEST(Sweep, OrderInvariant) {
  const auto base = sweep_base();
  const auto a = tb::coherence_sweep(base, {4, 6}, {10e-12, 40e-12}, {1, 4});
  const auto b = tb::coherence_sweep(base, {6, 4}, {40e-12, 10e-12}, {4, 1});
  ASSERT_EQ(a.size(), 8u);
  ASSERT_EQ(b.size(), 8u);
  for (const auto& ra : a) {
    const auto it = std::find_if(b.begin(), b.end(), [&](const tb::SweepRecord& rb) {
      return rb.spatial_resolution == ra.spatial_resolution && rb.temporal_resolution == ra.temporal_resolution &&
             rb.captures == ra.captures;
    });
    ASSERT_NE(it, b.end());
    EXPECT_EQ(it->coherence, ra.coherence);
    EXPECT_EQ(it->psf_fwhm, ra.psf_fwhm);
  }
  EXPECT_EQ(a[0].spatial_resolution, 4);
  EXPECT_EQ(a[0].temporal_resolution, 10e-12);
  EXPECT_EQ(a[1].captures, 4);
}

TEST(Sweep, CoarserBinsRaiseCoherence) {
  const auto base = sweep_base();
  const auto r = tb::coherence_sweep(base, {6}, {10e-12, 100e-12, 1000e-12}, {1});
  EXPECT_LE(r[0].coherence, r[1].coherence);
  EXPECT_LE(r[1].coherence, r[2].coherence);
}

TEST(Sweep, DegenerateCombinationIsInvalid) {
  auto base = sweep_base();
  base.grid.dims = {1, 1, 1};
  const auto r = tb::coherence_sweep(base, {6}, {10e-12}, {1});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].valid);
}
