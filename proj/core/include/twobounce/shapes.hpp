// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "twobounce/volume.hpp"

namespace twobounce {

/// 5x7 bitmap glyph for 'A'-'Z' (lower case is folded). Row 0 is the top row;
/// bit 4 of each row is the leftmost column. Throws Error for other characters.
std::array<std::uint8_t, 7> glyph(char letter);

/// Number of set pixels in a glyph.
int glyph_population(char letter);

/// Plane normal to `axis` at voxel index `offset` along it. The first of the two
/// remaining axes (in x, y, z order) runs horizontally, the second vertically.
struct LetterPlane {
  int axis = 1;
  int offset = 0;
};

/// Letters drawn one voxel thick on `plane`, vertically centred and spaced
/// evenly across the horizontal axis, with glyph row 0 at the highest vertical
/// index. Throws Error when the text does not fit or the plane is off the grid.
OccupancyVolume make_letter_occupancy(const VoxelGrid& grid, const std::string& letters, LetterPlane plane);

/// Occupied voxels with index in [lo, hi) on every axis, clipped to the grid.
OccupancyVolume make_box(const VoxelGrid& grid, std::array<int, 3> lo, std::array<int, 3> hi);

/// Stick figure made of six boxes (torso, head, two arms, two legs) scaled to
/// fill the grid. It stands along `up_axis`, spreads its arms along
/// `lateral_axis` and is two voxels deep (one when the third axis is a single
/// voxel), centred on the third axis.
OccupancyVolume make_mannequin_proxy(const VoxelGrid& grid, int up_axis = 1, int lateral_axis = 2);

}  // namespace twobounce
