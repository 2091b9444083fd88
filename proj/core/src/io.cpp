// SPDX-License-Identifier: Apache-2.0
#include "twobounce/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "twobounce/config.hpp"

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace twobounce {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string scene_hash(const SceneConfig& scene) { return sha256_hex(scene_to_json(scene).dump()); }

std::string pattern_hash(const MultiplexPattern& pattern) {
  std::string bytes = std::to_string(pattern.captures()) + "x" + std::to_string(pattern.sources()) + ":";
  for (auto e : pattern.entries()) bytes.push_back(e != 0 ? '1' : '0');
  return sha256_hex(bytes);
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw Error(std::string("truncated file while reading ") + what);
  return value;
}

void expect_magic(std::istream& in, const char* magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) throw Error(std::string("bad magic, expected ") + magic);
}

bool fits_uint32(const TransientCube& cube) {
  if (!cube.counts) return false;
  for (double v : cube.values) {
    if (!(v >= 0.0) || v > std::numeric_limits<std::uint32_t>::max() || v != std::floor(v)) return false;
  }
  return true;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

void write_cube(std::ostream& out, const TransientCube& cube) {
  out.write("2BTR", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cube.n_u));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cube.n_v));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cube.n_t));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(cube.kind));
  const bool as_uint = fits_uint32(cube);
  put<std::uint8_t>(out, as_uint ? 1 : 0);
  for (double v : cube.values) {
    if (as_uint) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
    } else {
      put<float>(out, static_cast<float>(v));
    }
  }
  if (!out) throw Error("failed writing transient cube");
}

TransientCube read_cube(std::istream& in) {
  expect_magic(in, "2BTR");
  const auto nu = get<std::uint32_t>(in, "n_u");
  const auto nv = get<std::uint32_t>(in, "n_v");
  const auto nt = get<std::uint32_t>(in, "n_t");
  const auto kind = get<std::uint8_t>(in, "kind");
  const auto type = get<std::uint8_t>(in, "value type");
  if (kind > 2) throw Error("unknown cube kind " + std::to_string(kind));
  if (type > 1) throw Error("unknown cube value type " + std::to_string(type));
  TransientCube cube(static_cast<int>(nu), static_cast<int>(nv), static_cast<int>(nt), static_cast<CubeKind>(kind));
  cube.counts = type == 1;
  for (double& v : cube.values) {
    v = type == 1 ? static_cast<double>(get<std::uint32_t>(in, "values")) : static_cast<double>(get<float>(in, "values"));
  }
  return cube;
}

void write_cube(const std::filesystem::path& path, const TransientCube& cube) {
  auto out = open_out(path);
  write_cube(out, cube);
}

TransientCube read_cube(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_cube(in);
}

void write_volume(std::ostream& out, const OccupancyVolume& volume) {
  const VoxelGrid& g = volume.grid;
  out.write("2BVL", 4);
  for (int d : g.dims) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<float>(out, static_cast<float>(g.voxel_size));
  for (int a = 0; a < 3; ++a) put<float>(out, static_cast<float>(g.origin[a]));
  for (double v : volume.values) {
    if (volume.binary) {
      put<std::uint8_t>(out, v != 0.0 ? 1 : 0);
    } else {
      put<float>(out, static_cast<float>(v));
    }
  }
  if (!out) throw Error("failed writing volume");
}

OccupancyVolume read_volume(std::istream& in) {
  expect_magic(in, "2BVL");
  VoxelGrid g;
  for (int& d : g.dims) d = static_cast<int>(get<std::uint32_t>(in, "dims"));
  g.voxel_size = get<float>(in, "voxel_size");
  for (int a = 0; a < 3; ++a) g.origin[a] = get<float>(in, "origin");
  const std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t n = g.size();
  OccupancyVolume vol;
  if (rest.size() == n) {
    vol = OccupancyVolume::empty_binary(g);
    for (std::size_t i = 0; i < n; ++i) vol.values[i] = static_cast<unsigned char>(rest[i]) != 0 ? 1.0 : 0.0;
  } else if (rest.size() == 4 * n) {
    vol = OccupancyVolume::zeros(g);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, rest.data() + 4 * i, 4);
      vol.values[i] = f;
    }
  } else {
    throw Error("volume payload size " + std::to_string(rest.size()) + " matches neither u8 nor f32 layout");
  }
  return vol;
}

void write_volume(const std::filesystem::path& path, const OccupancyVolume& volume) {
  auto out = open_out(path);
  write_volume(out, volume);
}

OccupancyVolume read_volume(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_volume(in);
}

std::vector<std::filesystem::path> write_slice_images(const OccupancyVolume& volume, int axis,
                                                      const std::filesystem::path& out_dir, const std::string& prefix) {
  if (axis < 0 || axis > 2) throw Error("slice axis must be 0, 1 or 2");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw Error("cannot create directory " + out_dir.string());

  const auto& d = volume.grid.dims;
  const int a0 = axis == 0 ? 1 : 0;
  const int a1 = axis == 2 ? 1 : 2;
  const int n = d[static_cast<std::size_t>(axis)];
  const int w = d[static_cast<std::size_t>(a0)];
  const int h = d[static_cast<std::size_t>(a1)];
  double lo = 0.0;
  double hi = 0.0;
  if (!volume.values.empty()) {
    const auto [mn, mx] = std::minmax_element(volume.values.begin(), volume.values.end());
    lo = *mn;
    hi = *mx;
  }
  const int digits = std::max(3, static_cast<int>(std::to_string(std::max(0, n - 1)).size()));
  const char axis_name = "xyz"[axis];

  std::vector<std::filesystem::path> files;
  for (int s = 0; s < n; ++s) {
    std::ostringstream name;
    name << prefix << '_' << axis_name << '_' << std::setw(digits) << std::setfill('0') << s << ".pgm";
    const auto path = out_dir / name.str();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << w << ' ' << h << "\n255\n";
    std::array<int, 3> idx{};
    idx[static_cast<std::size_t>(axis)] = s;
    for (int r = h - 1; r >= 0; --r) {
      for (int c = 0; c < w; ++c) {
        idx[static_cast<std::size_t>(a0)] = c;
        idx[static_cast<std::size_t>(a1)] = r;
        const double v = volume.at(idx[0], idx[1], idx[2]);
        const int px = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 0;
        out.put(static_cast<char>(static_cast<unsigned char>(px)));
      }
    }
    if (!out) throw Error("failed writing " + path.string());
    files.push_back(path);
  }
  return files;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "spatial,temporal_ps,captures,coherence,fwhm_x,fwhm_y,fwhm_z,valid,runtime_s\n";
  out << std::setprecision(12);
  for (const auto& r : records) {
    out << r.spatial_resolution << ',' << r.temporal_resolution * 1e12 << ',' << r.captures << ',' << r.coherence << ','
        << r.psf_fwhm[0] << ',' << r.psf_fwhm[1] << ',' << r.psf_fwhm[2] << ',' << (r.valid ? 1 : 0) << ','
        << r.runtime << '\n';
  }
}

}  // namespace twobounce
