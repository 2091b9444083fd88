// SPDX-License-Identifier: Apache-2.0
#include "twobounce/volume.hpp"

#include <algorithm>
#include <string>

namespace twobounce {

OccupancyVolume OccupancyVolume::indicator(const VoxelGrid& g, std::size_t voxel) {
  if (voxel >= g.size()) throw GeometryError("voxel index " + std::to_string(voxel) + " out of range");
  OccupancyVolume v(g, true);
  v.values[voxel] = 1.0;
  return v;
}

std::size_t OccupancyVolume::count_nonzero() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double x) { return x != 0.0; }));
}

void OccupancyVolume::validate() const {
  if (values.size() != grid.size()) throw GeometryError("volume size does not match its grid");
  if (binary) {
    for (double x : values) {
      if (x != 0.0 && x != 1.0) throw GeometryError("binary volume holds a value other than 0 or 1");
    }
  }
}

}  // namespace twobounce
