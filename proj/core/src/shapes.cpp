// SPDX-License-Identifier: Apache-2.0
#include "twobounce/shapes.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <string>

namespace twobounce {

namespace {

// clang-format off
constexpr std::array<std::array<std::uint8_t, 7>, 26> kFont = {{
  {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // A
  {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},  // B
  {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E},  // C
  {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E},  // D
  {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F},  // E
  {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},  // F
  {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F},  // G
  {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // H
  {0x00, 0x04, 0x04, 0x04, 0x04, 0x04, 0x00},  // I
  {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},  // J
  {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // K
  {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},  // L
  {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11},  // M
  {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // N
  {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // O
  {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},  // P
  {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D},  // Q
  {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},  // R
  {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E},  // S
  {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // T
  {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // U
  {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},  // V
  {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A},  // W
  {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},  // X
  {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04},  // Y
  {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},  // Z
}};
// clang-format on

constexpr int kGlyphWidth = 5;
constexpr int kGlyphHeight = 7;

}  // namespace

std::array<std::uint8_t, 7> glyph(char letter) {
  const int c = std::toupper(static_cast<unsigned char>(letter));
  if (c < 'A' || c > 'Z') throw Error(std::string("no glyph for character '") + letter + "'");
  return kFont[static_cast<std::size_t>(c - 'A')];
}

int glyph_population(char letter) {
  int n = 0;
  for (auto row : glyph(letter)) n += std::popcount(static_cast<unsigned>(row));
  return n;
}

OccupancyVolume make_letter_occupancy(const VoxelGrid& grid, const std::string& letters, LetterPlane plane) {
  if (plane.axis < 0 || plane.axis > 2) throw Error("letter plane axis must be 0, 1 or 2");
  const int h_axis = plane.axis == 0 ? 1 : 0;
  const int v_axis = plane.axis == 2 ? 1 : 2;
  const int width = grid.dims[static_cast<std::size_t>(h_axis)];
  const int height = grid.dims[static_cast<std::size_t>(v_axis)];
  if (plane.offset < 0 || plane.offset >= grid.dims[static_cast<std::size_t>(plane.axis)]) {
    throw Error("letter plane offset " + std::to_string(plane.offset) + " is outside the grid");
  }
  OccupancyVolume vol = OccupancyVolume::empty_binary(grid);
  if (letters.empty()) return vol;
  for (char ch : letters) glyph(ch);

  const int n = static_cast<int>(letters.size());
  const int slack = width - kGlyphWidth * n;
  if (slack < 0 || height < kGlyphHeight) {
    throw Error("letters \"" + letters + "\" exceed the grid extent (" + std::to_string(width) + " x " +
                std::to_string(height) + " voxels)");
  }
  const int top = (height - kGlyphHeight) / 2 + kGlyphHeight - 1;
  for (int l = 0; l < n; ++l) {
    const int left = (l + 1) * slack / (n + 1) + l * kGlyphWidth;
    const auto rows = glyph(letters[static_cast<std::size_t>(l)]);
    for (int r = 0; r < kGlyphHeight; ++r) {
      for (int c = 0; c < kGlyphWidth; ++c) {
        if (((rows[static_cast<std::size_t>(r)] >> (kGlyphWidth - 1 - c)) & 1) == 0) continue;
        std::array<int, 3> idx{};
        idx[static_cast<std::size_t>(plane.axis)] = plane.offset;
        idx[static_cast<std::size_t>(h_axis)] = left + c;
        idx[static_cast<std::size_t>(v_axis)] = top - r;
        vol.at(idx[0], idx[1], idx[2]) = 1.0;
      }
    }
  }
  return vol;
}

OccupancyVolume make_box(const VoxelGrid& grid, std::array<int, 3> lo, std::array<int, 3> hi) {
  OccupancyVolume vol = OccupancyVolume::empty_binary(grid);
  for (std::size_t a = 0; a < 3; ++a) {
    lo[a] = std::max(lo[a], 0);
    hi[a] = std::min(hi[a], grid.dims[a]);
  }
  for (int k = lo[2]; k < hi[2]; ++k) {
    for (int j = lo[1]; j < hi[1]; ++j) {
      for (int i = lo[0]; i < hi[0]; ++i) vol.at(i, j, k) = 1.0;
    }
  }
  return vol;
}

OccupancyVolume make_mannequin_proxy(const VoxelGrid& grid, int up_axis, int lateral_axis) {
  if (up_axis < 0 || up_axis > 2 || lateral_axis < 0 || lateral_axis > 2 || up_axis == lateral_axis) {
    throw Error("mannequin axes must be two distinct axes in 0..2");
  }
  const int depth_axis = 3 - up_axis - lateral_axis;
  const int n_up = grid.dims[static_cast<std::size_t>(up_axis)];
  const int n_lat = grid.dims[static_cast<std::size_t>(lateral_axis)];
  const int n_depth = grid.dims[static_cast<std::size_t>(depth_axis)];
  auto span = [](double f0, double f1, int n) {
    const int lo = static_cast<int>(std::floor(f0 * n));
    return std::array<int, 2>{lo, std::max(lo + 1, static_cast<int>(std::floor(f1 * n)))};
  };
  const std::array<int, 2> depth = n_depth >= 2 ? std::array<int, 2>{n_depth / 2 - 1, n_depth / 2 + 1}
                                                 : std::array<int, 2>{0, 1};

  // (up range, lateral range) as fractions of the grid.
  constexpr double kParts[6][4] = {
      {0.45, 0.75, 0.38, 0.62},  // torso
      {0.78, 0.95, 0.44, 0.56},  // head
      {0.66, 0.74, 0.12, 0.38},  // arm
      {0.66, 0.74, 0.62, 0.88},  // arm
      {0.05, 0.45, 0.36, 0.45},  // leg
      {0.05, 0.45, 0.55, 0.64},  // leg
  };
  OccupancyVolume vol = OccupancyVolume::empty_binary(grid);
  for (const auto& p : kParts) {
    const auto up = span(p[0], p[1], n_up);
    // Mirror-exact: the part at (1 - f1, 1 - f0) lands on the reflected voxels.
    const int lat_lo = static_cast<int>(std::lround(p[2] * n_lat));
    const std::array<int, 2> lat{lat_lo, std::max(lat_lo + 1, n_lat - static_cast<int>(std::lround((1.0 - p[3]) * n_lat)))};
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    lo[static_cast<std::size_t>(up_axis)] = up[0];
    hi[static_cast<std::size_t>(up_axis)] = up[1];
    lo[static_cast<std::size_t>(lateral_axis)] = lat[0];
    hi[static_cast<std::size_t>(lateral_axis)] = lat[1];
    lo[static_cast<std::size_t>(depth_axis)] = depth[0];
    hi[static_cast<std::size_t>(depth_axis)] = depth[1];
    const auto part = make_box(grid, lo, hi);
    for (std::size_t v = 0; v < vol.size(); ++v) vol.values[v] = std::max(vol.values[v], part.values[v]);
  }
  return vol;
}

}  // namespace twobounce
