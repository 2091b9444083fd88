// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twobounce/io.hpp"

namespace tb = twobounce;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("twobounce_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Pgm {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

Pgm read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int maxval = 0;
  Pgm p;
  in >> magic >> p.width >> p.height >> maxval;
  in.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(maxval, 255);
  p.pixels.resize(static_cast<std::size_t>(p.width * p.height));
  in.read(reinterpret_cast<char*>(p.pixels.data()), static_cast<std::streamsize>(p.pixels.size()));
  return p;
}

tb::VoxelGrid grid(int nx, int ny, int nz) {
  tb::VoxelGrid g;
  g.dims = {nx, ny, nz};
  g.voxel_size = 0.02;
  g.origin = tb::Vec3(0.5, -0.25, 1.0);
  return g;
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(tb::sha256_hex(std::string("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(tb::sha256_hex(std::string()), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Cube, FloatRoundTrip) {
  tb::TransientCube c(3, 2, 4, tb::CubeKind::shadow);
  for (std::size_t j = 0; j < c.size(); ++j) c.values[j] = 0.25 * static_cast<double>(j) + 0.125;
  std::stringstream buf;
  tb::write_cube(buf, c);
  EXPECT_EQ(buf.str().size(), 4u + 12u + 2u + 4u * c.size());
  EXPECT_EQ(buf.str().substr(0, 4), "2BTR");
  const auto back = tb::read_cube(buf);
  EXPECT_EQ(back, c);
}

TEST(Cube, CountsUseIntegerPayload) {
  tb::TransientCube c(2, 2, 2, tb::CubeKind::light);
  c.counts = true;
  for (std::size_t j = 0; j < c.size(); ++j) c.values[j] = static_cast<double>(100000 + j);
  std::stringstream buf;
  tb::write_cube(buf, c);
  const std::string bytes = buf.str();
  EXPECT_EQ(static_cast<int>(bytes[16]), 1);  // kind light
  EXPECT_EQ(static_cast<int>(bytes[17]), 1);  // uint32 payload
  EXPECT_EQ(tb::read_cube(buf), c);
}

TEST(Cube, BadMagicThrows) {
  std::stringstream buf("XXXXgarbage");
  EXPECT_THROW(tb::read_cube(buf), tb::Error);
}

TEST(Volume, FloatAndBinaryRoundTrip) {
  auto v = tb::OccupancyVolume::zeros(grid(3, 4, 5));
  for (std::size_t j = 0; j < v.size(); ++j) v.values[j] = std::sin(static_cast<double>(j));
  std::stringstream buf;
  tb::write_volume(buf, v);
  const auto back = tb::read_volume(buf);
  EXPECT_FALSE(back.binary);
  EXPECT_EQ(back.grid.dims, v.grid.dims);
  EXPECT_NEAR(back.grid.voxel_size, 0.02, 1e-7);
  EXPECT_NEAR((back.grid.origin - v.grid.origin).norm(), 0.0, 1e-7);
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(back.values[j], static_cast<double>(static_cast<float>(v.values[j])));

  auto b = tb::OccupancyVolume::empty_binary(grid(3, 4, 5));
  b.values[7] = 1.0;
  b.values[20] = 1.0;
  std::stringstream bbuf;
  tb::write_volume(bbuf, b);
  EXPECT_EQ(bbuf.str().size(), 4u + 12u + 16u + b.size());
  const auto bback = tb::read_volume(bbuf);
  EXPECT_TRUE(bback.binary);
  EXPECT_EQ(bback.values, b.values);
}

TEST(Volume, TruncatedFileThrows) {
  auto v = tb::OccupancyVolume::zeros(grid(2, 2, 2));
  std::stringstream buf;
  tb::write_volume(buf, v);
  std::stringstream cut(buf.str().substr(0, buf.str().size() - 3));
  EXPECT_THROW(tb::read_volume(cut), tb::Error);
}

TEST(Slices, CountAndNames) {
  const auto dir = fresh_dir("names");
  const auto files = tb::write_slice_images(tb::OccupancyVolume::zeros(grid(3, 2, 4)), 2, dir);
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(files[0].filename(), "slice_z_000.pgm");
  EXPECT_EQ(files[3].filename(), "slice_z_003.pgm");
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
  fs::remove_all(dir);
}

TEST(Slices, ConstantVolumeIsBlack) {
  const auto dir = fresh_dir("constant");
  auto v = tb::OccupancyVolume::zeros(grid(3, 2, 2));
  std::fill(v.values.begin(), v.values.end(), 4.0);
  for (const auto& f : tb::write_slice_images(v, 0, dir)) {
    const auto img = read_pgm(f);
    EXPECT_EQ(img.width, 2);
    EXPECT_EQ(img.height, 2);
    for (auto px : img.pixels) EXPECT_EQ(px, 0);
  }
  fs::remove_all(dir);
}

TEST(Slices, PixelValuesAndOrientation) {
  const auto dir = fresh_dir("pixels");
  const auto g = grid(4, 3, 2);
  auto v = tb::OccupancyVolume::zeros(g);
  for (std::size_t j = 0; j < v.size(); ++j) v.values[j] = 0.5 * static_cast<double>(j) - 3.0;
  const double lo = -3.0;
  const double hi = 0.5 * static_cast<double>(v.size() - 1) - 3.0;
  const auto files = tb::write_slice_images(v, 2, dir, "rec");
  ASSERT_EQ(files.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    const auto img = read_pgm(files[static_cast<std::size_t>(k)]);
    ASSERT_EQ(img.width, 4);
    ASSERT_EQ(img.height, 3);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 4; ++col) {
        const int j = 2 - row;  // top row is the highest y index
        const double x = v.at(col, j, k);
        const auto expected = static_cast<int>(std::lround(255.0 * (x - lo) / (hi - lo)));
        EXPECT_EQ(img.pixels[static_cast<std::size_t>(row * 4 + col)], expected);
      }
    }
  }
  fs::remove_all(dir);
}

TEST(Slices, UnwritableDirectoryThrows) {
  const auto dir = fresh_dir("blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(tb::write_slice_images(tb::OccupancyVolume::zeros(grid(2, 2, 2)), 1, dir / "file" / "sub"), tb::Error);
  fs::remove_all(dir);
}

TEST(SweepCsv, HeaderAndUnits) {
  tb::SweepRecord r;
  r.spatial_resolution = 20;
  r.temporal_resolution = 10e-12;
  r.captures = 3;
  r.coherence = 0.5;
  r.psf_fwhm = {0.02, 0.04, 0.06};
  std::ostringstream out;
  tb::write_sweep_csv(out, {r});
  std::istringstream in(out.str());
  std::string header;
  std::string line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "spatial,temporal_ps,captures,coherence,fwhm_x,fwhm_y,fwhm_z,valid,runtime_s");
  EXPECT_EQ(line.substr(0, 9), "20,10,3,0");
  EXPECT_NE(line.find(",1,0"), std::string::npos);
}
