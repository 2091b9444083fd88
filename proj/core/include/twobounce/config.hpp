// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twobounce/operator.hpp"
#include "twobounce/recon.hpp"
#include "twobounce/scene.hpp"

namespace twobounce {

inline constexpr int kConfigSchema = 1;

struct OccupancySpec {
  enum class Kind { letters, box, mannequin_proxy, file };
  Kind kind = Kind::box;
  // letters
  std::string text;
  int axis = 1;
  int offset = 0;
  // box, voxel index range [min, max)
  std::array<int, 3> box_min{0, 0, 0};
  std::array<int, 3> box_max{0, 0, 0};
  // mannequin_proxy
  int up_axis = 1;
  int lateral_axis = 2;
  // file
  std::string path;

  bool operator==(const OccupancySpec&) const = default;
};

struct PatternSpec {
  enum class Kind { identity, blocks, strided, random };
  Kind kind = Kind::identity;
  /// Capture count; ignored (set to K) for identity.
  int M = 1;
  std::uint64_t seed = 0;

  bool operator==(const PatternSpec&) const = default;
};

struct NoiseSpec {
  /// Multiplies expected photon rates before Poisson sampling.
  double photon_scale = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const NoiseSpec&) const = default;
};

enum class Pipeline { simulate, reconstruct, sweep, snr, carve_baseline };

struct ReconSpec {
  ThresholdMethod threshold = ThresholdMethod::fraction_of_max;
  double threshold_param = 0.5;
  /// Also reconstruct with the time dimension discarded.
  bool intensity_baseline = true;
  bool write_slices = true;
  int slice_axis = 2;

  bool operator==(const ReconSpec&) const = default;
};

struct SweepSpec {
  std::vector<int> spatial;
  std::vector<double> temporal_ps;
  std::vector<int> captures;
  CoherenceOptions::Mode mode = CoherenceOptions::Mode::exact;
  std::size_t sample_columns = 256;
  std::uint64_t seed = 0;
  bool record_runtime = false;

  bool operator==(const SweepSpec&) const = default;
};

struct SnrSpec {
  /// Inward rotation of both walls, degrees.
  double wall_angle_deg = 0.0;
  /// Optional detector sub-rectangle [u0, u1, v0, v1).
  std::optional<std::array<int, 4>> detector_window;

  bool operator==(const SnrSpec&) const = default;
};

struct ExperimentConfig {
  SceneConfig scene;
  OccupancySpec occupancy;
  PatternSpec pattern;
  std::optional<NoiseSpec> noise;
  Pipeline pipeline = Pipeline::simulate;
  std::string output_dir = "out";
  ReconSpec recon;
  SweepSpec sweep;
  SnrSpec snr;
  unsigned threads = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

const char* to_string(Pipeline pipeline);
Pipeline parse_pipeline(const std::string& name);

/// Parses and validates a JSON config document. Absent optional fields take
/// their defaults; an absent time axis offset or bin count is fitted to the
/// scene. Throws ConfigError naming the offending key or field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON with every field explicit; parse_config inverts it.
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

nlohmann::json scene_to_json(const SceneConfig& scene);

/// Checks the cross-field invariants (M within [1, K], existing occupancy file,
/// valid geometry). Throws ConfigError.
void validate(const ExperimentConfig& cfg);

MultiplexPattern make_pattern(const PatternSpec& spec, int sources);

}  // namespace twobounce
