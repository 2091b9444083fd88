// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "twobounce/analysis.hpp"
#include "twobounce/transient.hpp"
#include "twobounce/volume.hpp"

namespace twobounce {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

/// Hash of the canonical JSON form of the scene / the pattern's dimensions and entries.
std::string scene_hash(const SceneConfig& scene);
std::string pattern_hash(const MultiplexPattern& pattern);

/// "2BTR", u32 n_u, n_v, n_t, u8 kind, u8 value type (0 float32, 1 uint32),
/// values in cube layout, all little-endian. Count cubes whose values are
/// integers in range are stored as uint32, everything else as float32.
void write_cube(std::ostream& out, const TransientCube& cube);
TransientCube read_cube(std::istream& in);
void write_cube(const std::filesystem::path& path, const TransientCube& cube);
TransientCube read_cube(const std::filesystem::path& path);

/// "2BVL", u32 dims, f32 voxel_size, 3 x f32 origin, then f32 values, or u8
/// values for binary volumes. The reader tells the two apart by length.
void write_volume(std::ostream& out, const OccupancyVolume& volume);
OccupancyVolume read_volume(std::istream& in);
void write_volume(const std::filesystem::path& path, const OccupancyVolume& volume);
OccupancyVolume read_volume(const std::filesystem::path& path);

/// One binary PGM per slice normal to `axis`, named <prefix>_<axis>_<index>.pgm
/// with zero-padded indices. Pixels are round(255 (v - min) / (max - min)) over
/// the whole volume, or 0 when max == min. Image columns follow the lower
/// remaining axis, rows the higher one with its largest index at the top.
/// Throws Error when the directory cannot be written.
std::vector<std::filesystem::path> write_slice_images(const OccupancyVolume& volume, int axis,
                                                      const std::filesystem::path& out_dir,
                                                      const std::string& prefix = "slice");

/// Header `spatial,temporal_ps,captures,coherence,fwhm_x,fwhm_y,fwhm_z,valid,runtime_s`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

}  // namespace twobounce
