// SPDX-License-Identifier: Apache-2.0
#include "twobounce/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

namespace twobounce {

Vec3 RelayWall::normal() const { return edge_u.cross(edge_v).normalized(); }

Vec3 RelayWall::sample_point(int u, int v) const {
  return origin + edge_u * ((u + 0.5) / grid_u) + edge_v * ((v + 0.5) / grid_v);
}

void RelayWall::validate() const {
  if (grid_u < 1 || grid_v < 1) throw GeometryError("relay wall grid must be at least 1x1");
  const double scale = edge_u.norm() * edge_v.norm();
  if (!(scale > 0.0) || edge_u.cross(edge_v).norm() <= 1e-12 * scale) {
    throw GeometryError("relay wall edges are not linearly independent");
  }
}

std::vector<Vec3> wall_sample_points(const RelayWall& wall) {
  std::vector<Vec3> points;
  points.reserve(wall.sample_count());
  for (int v = 0; v < wall.grid_v; ++v) {
    for (int u = 0; u < wall.grid_u; ++u) points.push_back(wall.sample_point(u, v));
  }
  return points;
}

RelayWall restrict_wall(const RelayWall& wall, int u0, int u1, int v0, int v1) {
  if (u0 < 0 || v0 < 0 || u1 > wall.grid_u || v1 > wall.grid_v || u0 >= u1 || v0 >= v1) {
    throw GeometryError("wall sub-rectangle out of range");
  }
  RelayWall sub;
  sub.origin = wall.origin + wall.edge_u * (static_cast<double>(u0) / wall.grid_u) +
               wall.edge_v * (static_cast<double>(v0) / wall.grid_v);
  sub.edge_u = wall.edge_u * (static_cast<double>(u1 - u0) / wall.grid_u);
  sub.edge_v = wall.edge_v * (static_cast<double>(v1 - v0) / wall.grid_v);
  sub.grid_u = u1 - u0;
  sub.grid_v = v1 - v0;
  return sub;
}

RelayWall rotate_wall(const RelayWall& wall, double angle_rad, const Vec3& toward) {
  Vec3 axis = wall.edge_v.normalized();
  // Orient the axis so that a positive angle moves the far edge toward `toward`.
  if (axis.cross(wall.edge_u).dot(toward - wall.origin) < 0.0) axis = -axis;
  RelayWall rotated = wall;
  rotated.edge_u = Eigen::AngleAxisd(angle_rad, axis) * wall.edge_u;
  return rotated;
}

std::array<int, 3> VoxelGrid::unravel(std::size_t index) const {
  const auto nx = static_cast<std::size_t>(dims[0]);
  const auto ny = static_cast<std::size_t>(dims[1]);
  return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny),
          static_cast<int>(index / (nx * ny))};
}

Vec3 VoxelGrid::center(int i, int j, int k) const {
  return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
}

Vec3 VoxelGrid::center(std::size_t index) const {
  const auto ijk = unravel(index);
  return center(ijk[0], ijk[1], ijk[2]);
}

Vec3 VoxelGrid::upper_corner() const {
  return origin + voxel_size * Vec3(dims[0], dims[1], dims[2]);
}

std::size_t VoxelGrid::center_voxel() const {
  return linear_index(dims[0] / 2, dims[1] / 2, dims[2] / 2);
}

void VoxelGrid::validate() const {
  if (!(voxel_size > 0.0)) throw GeometryError("voxel_size must be positive");
  for (int d : dims) {
    if (d < 1) throw GeometryError("voxel grid dims must be positive");
  }
}

namespace {

// Separating-axis test between the closed wall parallelogram and the open
// interior of the grid box. Walls that only touch a grid face do not count.
bool wall_intersects_grid(const RelayWall& wall, const VoxelGrid& grid) {
  const Vec3 lo = grid.origin;
  const Vec3 hi = grid.upper_corner();
  const Vec3 center = 0.5 * (lo + hi);
  const Vec3 half = 0.5 * (hi - lo);
  const std::array<Vec3, 4> quad{wall.origin, wall.origin + wall.edge_u,
                                 wall.origin + wall.edge_u + wall.edge_v, wall.origin + wall.edge_v};
  std::vector<Vec3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), wall.edge_u.cross(wall.edge_v)};
  for (int a = 0; a < 3; ++a) {
    const Vec3 e = Vec3::Unit(a);
    axes.push_back(e.cross(wall.edge_u));
    axes.push_back(e.cross(wall.edge_v));
  }
  const double scale = (hi - lo).norm() + wall.edge_u.norm() + wall.edge_v.norm() + center.norm();
  for (const Vec3& raw : axes) {
    const double n = raw.norm();
    if (n < 1e-12) continue;
    const Vec3 axis = raw / n;
    const double c = center.dot(axis);
    const double r = half.x() * std::abs(axis.x()) + half.y() * std::abs(axis.y()) + half.z() * std::abs(axis.z());
    double qmin = std::numeric_limits<double>::infinity();
    double qmax = -qmin;
    for (const Vec3& p : quad) {
      qmin = std::min(qmin, p.dot(axis));
      qmax = std::max(qmax, p.dot(axis));
    }
    const double tol = 1e-12 * scale;
    if (qmax <= c - r + tol || qmin >= c + r - tol) return false;
  }
  return true;
}

}  // namespace

void SceneConfig::validate() const {
  illum_wall.validate();
  obs_wall.validate();
  grid.validate();
  if (!(time.bin_width > 0.0)) throw GeometryError("time bin_width must be positive");
  if (time.n_bins < 1) throw GeometryError("time n_bins must be positive");
  if (!(laser_intensity > 0.0)) throw GeometryError("laser_intensity must be positive");
  if (wall_intersects_grid(illum_wall, grid)) throw GeometryError("voxel grid intersects the illumination wall");
  if (wall_intersects_grid(obs_wall, grid)) throw GeometryError("voxel grid intersects the observation wall");
}

std::vector<std::size_t> ray_voxels(const VoxelGrid& grid, const Vec3& p0, const Vec3& p1) {
  const Vec3 d = p1 - p0;
  if (d.squaredNorm() == 0.0) throw GeometryError("degenerate ray");

  // Work in grid units; voxel (i,j,k) is the half-open box [i,i+1) x [j,j+1) x [k,k+1).
  const Vec3 q0 = (p0 - grid.origin) / grid.voxel_size;
  const Vec3 dq = d / grid.voxel_size;
  const double length = dq.norm();
  constexpr double kMinLength = 1e-9;

  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double n = grid.dims[a];
    if (dq[a] == 0.0) {
      if (q0[a] < 0.0 || q0[a] >= n) return {};
      continue;
    }
    double ta = (0.0 - q0[a]) / dq[a];
    double tb = (n - q0[a]) / dq[a];
    if (ta > tb) std::swap(ta, tb);
    t_enter = std::max(t_enter, ta);
    t_exit = std::min(t_exit, tb);
  }
  if ((t_exit - t_enter) * length <= kMinLength) return {};

  // Parameters where the segment crosses interior grid planes.
  std::vector<double> breaks{t_enter, t_exit};
  for (int a = 0; a < 3; ++a) {
    if (dq[a] == 0.0) continue;
    const double qa = q0[a] + t_enter * dq[a];
    const double qb = q0[a] + t_exit * dq[a];
    const double lo = std::min(qa, qb);
    const double hi = std::max(qa, qb);
    for (double k = std::floor(lo) + 1.0; k < hi; k += 1.0) {
      const double t = (k - q0[a]) / dq[a];
      if (t > t_enter && t < t_exit) breaks.push_back(t);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  std::vector<std::size_t> voxels;
  voxels.reserve(breaks.size());
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double ta = breaks[b];
    const double tb = breaks[b + 1];
    if ((tb - ta) * length <= kMinLength) continue;
    const Vec3 q = q0 + 0.5 * (ta + tb) * dq;
    std::array<int, 3> ijk{};
    for (int a = 0; a < 3; ++a) {
      ijk[a] = std::clamp(static_cast<int>(std::floor(q[a])), 0, grid.dims[a] - 1);
    }
    const std::size_t index = grid.linear_index(ijk[0], ijk[1], ijk[2]);
    if (voxels.empty() || voxels.back() != index) voxels.push_back(index);
  }
  return voxels;
}

std::optional<Vec3> ray_wall_intersection(const RelayWall& wall, const Vec3& x, const Vec3& s) {
  const Vec3 dir = x - s;
  if (dir.squaredNorm() == 0.0) throw GeometryError("degenerate ray");
  const Vec3 n = wall.edge_u.cross(wall.edge_v);
  const double denom = n.dot(dir);
  if (std::abs(denom) <= 1e-14 * n.norm() * dir.norm()) return std::nullopt;
  const double t = n.dot(wall.origin - s) / denom;
  if (!(t > 1.0)) return std::nullopt;
  const Vec3 p = s + t * dir;
  const Vec3 rel = p - wall.origin;
  const double n2 = n.squaredNorm();
  const double a = n.dot(rel.cross(wall.edge_v)) / n2;
  const double b = n.dot(wall.edge_u.cross(rel)) / n2;
  constexpr double kTol = 1e-12;
  if (a < -kTol || a > 1.0 + kTol || b < -kTol || b > 1.0 + kTol) return std::nullopt;
  return p;
}

double path_length(const Vec3& g, const Vec3& l, const Vec3& s, const SceneConfig& scene) {
  double d = (l - g).norm() + (l - s).norm();
  if (scene.include_camera_leg) d += (s - scene.camera_origin).norm();
  return d;
}

std::optional<int> path_bin(const Vec3& g, const Vec3& l, const Vec3& s, const SceneConfig& scene) {
  const double t = path_length(g, l, s, scene) / kSpeedOfLight;
  const double rel = (t - scene.time.t_offset) / scene.time.bin_width;
  if (!(rel >= 0.0)) return std::nullopt;
  const double bin = std::floor(rel);
  if (bin >= scene.time.n_bins) return std::nullopt;
  return static_cast<int>(bin);
}

namespace {

template <typename Reduce>
double arrival_extreme(const SceneConfig& scene, double init, Reduce reduce) {
  const auto sources = scene.sources();
  const auto detectors = scene.detectors();
  double best = init;
  for (const Vec3& s : detectors) {
    for (const Vec3& l : sources) {
      best = reduce(best, path_length(scene.laser_origin, l, s, scene) / kSpeedOfLight);
    }
  }
  return best;
}

}  // namespace

double min_arrival_time(const SceneConfig& scene) {
  return arrival_extreme(scene, std::numeric_limits<double>::infinity(),
                         [](double a, double b) { return std::min(a, b); });
}

double max_arrival_time(const SceneConfig& scene) {
  return arrival_extreme(scene, 0.0, [](double a, double b) { return std::max(a, b); });
}

int covering_bin_count(const SceneConfig& scene) {
  const double span = (max_arrival_time(scene) - scene.time.t_offset) / scene.time.bin_width;
  return std::max(1, static_cast<int>(std::floor(span)) + 1);
}

void fit_time_axis(SceneConfig& scene) {
  scene.time.t_offset = default_time_offset(scene);
  scene.time.n_bins = covering_bin_count(scene);
}

}  // namespace twobounce
