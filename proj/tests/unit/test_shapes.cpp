// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <bitset>

#include "twobounce/shapes.hpp"

namespace tb = twobounce;

namespace {

tb::VoxelGrid grid(int nx, int ny, int nz) {
  tb::VoxelGrid g;
  g.dims = {nx, ny, nz};
  g.voxel_size = 0.01;
  return g;
}

int table_population(char c) {
  int n = 0;
  for (auto row : tb::glyph(c)) n += static_cast<int>(std::bitset<5>(row).count());
  return n;
}

}  // namespace

TEST(Font, LettersOnlyAndFolded) {
  EXPECT_EQ(tb::glyph('a'), tb::glyph('A'));
  EXPECT_THROW(tb::glyph('3'), tb::Error);
  EXPECT_THROW(tb::glyph(' '), tb::Error);
  for (char c = 'A'; c <= 'Z'; ++c) {
    EXPECT_GT(tb::glyph_population(c), 0) << c;
    EXPECT_EQ(tb::glyph_population(c), table_population(c)) << c;
    for (auto row : tb::glyph(c)) EXPECT_LT(row, 32) << c;
  }
}

TEST(Letters, SingleIIsAFiveVoxelColumn) {
  const auto occ = tb::make_letter_occupancy(grid(5, 1, 7), "I", {1, 0});
  EXPECT_EQ(occ.count_nonzero(), 5u);
  int column = -1;
  for (int k = 0; k < 7; ++k) {
    for (int i = 0; i < 5; ++i) {
      if (occ.at(i, 0, k) == 0.0) continue;
      if (column < 0) column = i;
      EXPECT_EQ(i, column);
    }
  }
}

TEST(Letters, EmptyTextIsEmpty) {
  EXPECT_EQ(tb::make_letter_occupancy(grid(8, 1, 8), "", {1, 0}).count_nonzero(), 0u);
}

TEST(Letters, NlosCountMatchesFont) {
  const auto occ = tb::make_letter_occupancy(grid(32, 1, 16), "NLOS", {1, 0});
  EXPECT_EQ(static_cast<int>(occ.count_nonzero()),
            table_population('N') + table_population('L') + table_population('O') + table_population('S'));
  EXPECT_TRUE(occ.binary);
}

TEST(Letters, GlyphOrientation) {
  // 'L': the vertical stroke is on the left, the foot at the bottom.
  const auto occ = tb::make_letter_occupancy(grid(5, 1, 7), "L", {1, 0});
  const auto rows = tb::glyph('L');
  for (int r = 0; r < 7; ++r) {
    for (int c = 0; c < 5; ++c) {
      const bool on = (rows[static_cast<std::size_t>(r)] >> (4 - c)) & 1;
      EXPECT_EQ(occ.at(c, 0, 6 - r) != 0.0, on) << r << "," << c;
    }
  }
}

TEST(Letters, PlaneNormalToX) {
  const auto occ = tb::make_letter_occupancy(grid(3, 24, 9), "NLOS", {0, 1});
  EXPECT_EQ(static_cast<int>(occ.count_nonzero()),
            table_population('N') + table_population('L') + table_population('O') + table_population('S'));
  for (int k = 0; k < 9; ++k) {
    for (int j = 0; j < 24; ++j) {
      EXPECT_EQ(occ.at(0, j, k), 0.0);
      EXPECT_EQ(occ.at(2, j, k), 0.0);
    }
  }
}

TEST(Letters, TooWideOrOffGridThrows) {
  EXPECT_THROW(tb::make_letter_occupancy(grid(9, 1, 7), "AB", {1, 0}), tb::Error);
  EXPECT_THROW(tb::make_letter_occupancy(grid(5, 1, 6), "I", {1, 0}), tb::Error);
  EXPECT_THROW(tb::make_letter_occupancy(grid(5, 1, 7), "I", {1, 1}), tb::Error);
  EXPECT_THROW(tb::make_letter_occupancy(grid(5, 1, 7), "I!", {1, 0}), tb::Error);
}

TEST(Box, ClippedHalfOpenRange) {
  const auto occ = tb::make_box(grid(4, 4, 4), {1, 1, 1}, {3, 3, 3});
  EXPECT_EQ(occ.count_nonzero(), 8u);
  EXPECT_EQ(occ.at(1, 1, 1), 1.0);
  EXPECT_EQ(occ.at(3, 3, 3), 0.0);
  EXPECT_EQ(tb::make_box(grid(4, 4, 4), {-2, 2, 3}, {10, 3, 9}).count_nonzero(), 4u);
}

TEST(Mannequin, SixConnectedPartsInsideGrid) {
  const auto g = grid(4, 40, 40);
  const auto occ = tb::make_mannequin_proxy(g, 2, 1);
  EXPECT_GT(occ.count_nonzero(), 0u);
  // Two voxels deep, centred on x.
  for (int k = 0; k < 40; ++k) {
    for (int j = 0; j < 40; ++j) {
      EXPECT_EQ(occ.at(0, j, k), 0.0);
      EXPECT_EQ(occ.at(3, j, k), 0.0);
      EXPECT_EQ(occ.at(1, j, k), occ.at(2, j, k));
    }
  }
  // Left/right symmetry of the figure.
  for (int k = 0; k < 40; ++k) {
    for (int j = 0; j < 40; ++j) EXPECT_EQ(occ.at(1, j, k), occ.at(1, 39 - j, k)) << j << "," << k;
  }
  // The head sits above the torso; the legs reach below it.
  int top = -1;
  int bottom = 40;
  for (int k = 0; k < 40; ++k) {
    for (int j = 0; j < 40; ++j) {
      if (occ.at(1, j, k) == 0.0) continue;
      top = std::max(top, k);
      bottom = std::min(bottom, k);
    }
  }
  EXPECT_GE(top, 34);
  EXPECT_LE(bottom, 3);
  EXPECT_THROW(tb::make_mannequin_proxy(g, 1, 1), tb::Error);
}
