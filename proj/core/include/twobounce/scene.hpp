// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "twobounce/common.hpp"

namespace twobounce {

/// Planar parallelogram relay surface sampled on a regular grid of cell centers.
///
/// The wall spans {origin + a*edge_u + b*edge_v : a, b in [0, 1]}. Sample (u, v)
/// sits at the center of cell (u, v), and samples are ordered row-major with u
/// fastest, so the sample index is u + grid_u * v.
struct RelayWall {
  Vec3 origin = Vec3::Zero();
  Vec3 edge_u = Vec3::UnitZ();
  Vec3 edge_v = Vec3::UnitY();
  int grid_u = 1;
  int grid_v = 1;

  std::size_t sample_count() const {
    return static_cast<std::size_t>(grid_u) * static_cast<std::size_t>(grid_v);
  }
  /// Unit normal edge_u x edge_v.
  Vec3 normal() const;
  Vec3 sample_point(int u, int v) const;
  /// Throws GeometryError when the edges are parallel or the grid is empty.
  void validate() const;

  bool operator==(const RelayWall&) const = default;
};

std::vector<Vec3> wall_sample_points(const RelayWall& wall);

/// Wall covering the cell sub-rectangle [u0, u1) x [v0, v1) of `wall`, keeping
/// the original sample pitch. Used to model a camera with a narrow field of view.
RelayWall restrict_wall(const RelayWall& wall, int u0, int u1, int v0, int v1);

/// Rotates edge_u about the axis through `origin` along edge_v by `angle_rad`.
/// Positive angles swing the far edge of the wall toward `toward`.
RelayWall rotate_wall(const RelayWall& wall, double angle_rad, const Vec3& toward);

/// Uniform cubic voxel lattice. Linear index is i + nx*j + nx*ny*k.
struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 1.0;
  std::array<int, 3> dims{1, 1, 1};

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t linear_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> unravel(std::size_t index) const;
  Vec3 center(int i, int j, int k) const;
  Vec3 center(std::size_t index) const;
  Vec3 upper_corner() const;
  /// Index of the voxel nearest the geometric center of the grid.
  std::size_t center_voxel() const;
  void validate() const;

  bool operator==(const VoxelGrid&) const = default;
};

struct TimeAxis {
  double bin_width = 10e-12;  // seconds
  int n_bins = 1;
  double t_offset = 0.0;  // seconds

  double end_time() const { return t_offset + n_bins * bin_width; }
  bool operator==(const TimeAxis&) const = default;
};

/// Complete two-bounce geometry: laser, camera, the two relay walls, the hidden
/// voxel grid and the time axis.
struct SceneConfig {
  Vec3 laser_origin = Vec3::Zero();
  Vec3 camera_origin = Vec3::Zero();
  RelayWall illum_wall;
  RelayWall obs_wall;
  VoxelGrid grid;
  TimeAxis time;
  double laser_intensity = 1.0;
  bool include_falloff = false;
  bool include_camera_leg = false;

  std::size_t source_count() const { return illum_wall.sample_count(); }
  std::size_t detector_count() const { return obs_wall.sample_count(); }
  std::vector<Vec3> sources() const { return wall_sample_points(illum_wall); }
  std::vector<Vec3> detectors() const { return wall_sample_points(obs_wall); }

  /// Checks every type invariant, including that the voxel grid stays clear of
  /// both wall parallelograms. Throws GeometryError.
  void validate() const;

  bool operator==(const SceneConfig&) const = default;
};

/// Voxels whose boxes the open segment (p0, p1) crosses with positive length,
/// ordered from p0 to p1. Throws GeometryError("degenerate ray") when p0 == p1.
std::vector<std::size_t> ray_voxels(const VoxelGrid& grid, const Vec3& p0, const Vec3& p1);

/// Where the ray from `s` through `x`, continued past `x`, meets the wall
/// parallelogram. Empty when the ray is parallel to the wall or misses it.
std::optional<Vec3> ray_wall_intersection(const RelayWall& wall, const Vec3& x, const Vec3& s);

/// Two-bounce path length |l-g| + |l-s|, plus |s-C| when the camera leg is on.
double path_length(const Vec3& g, const Vec3& l, const Vec3& s, const SceneConfig& scene);

/// Time bin for the two-bounce path g -> l -> s, or empty if it falls outside the axis.
std::optional<int> path_bin(const Vec3& g, const Vec3& l, const Vec3& s, const SceneConfig& scene);

/// Shortest / longest arrival time over every (source, detector) pair.
double min_arrival_time(const SceneConfig& scene);
double max_arrival_time(const SceneConfig& scene);

/// Default time origin: the earliest arrival over all (source, detector) pairs.
inline double default_time_offset(const SceneConfig& scene) { return min_arrival_time(scene); }

/// Smallest bin count that holds every arrival given the current offset and width.
int covering_bin_count(const SceneConfig& scene);

/// Resets the time axis to start at the earliest arrival with enough bins for
/// the latest one, keeping the bin width.
void fit_time_axis(SceneConfig& scene);

}  // namespace twobounce
