// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "twobounce/scene.hpp"

namespace twobounce {

/// Scalar field over a voxel grid. Binary volumes hold occupancy in {0, 1};
/// real-valued ones hold reconstructions, PSFs or SNR maps.
struct OccupancyVolume {
  VoxelGrid grid;
  std::vector<double> values;
  bool binary = false;

  OccupancyVolume() = default;
  OccupancyVolume(const VoxelGrid& g, bool is_binary)
      : grid(g), values(g.size(), 0.0), binary(is_binary) {}

  static OccupancyVolume zeros(const VoxelGrid& g) { return OccupancyVolume(g, false); }
  static OccupancyVolume empty_binary(const VoxelGrid& g) { return OccupancyVolume(g, true); }
  /// Binary volume with only `voxel` set.
  static OccupancyVolume indicator(const VoxelGrid& g, std::size_t voxel);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(int i, int j, int k) { return values[grid.linear_index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.linear_index(i, j, k)]; }

  std::size_t count_nonzero() const;
  /// Throws GeometryError when `binary` is set but some value is not 0 or 1.
  void validate() const;

  bool operator==(const OccupancyVolume&) const = default;
};

}  // namespace twobounce
