// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twobounce/config.hpp"

namespace twobounce {

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::filesystem::path output_dir;
  std::vector<Artifact> artifacts;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  nlohmann::json config;

  nlohmann::json to_json() const;
};

/// Ground-truth occupancy described by the config.
OccupancyVolume build_occupancy(const ExperimentConfig& cfg);

/// Scene used by the SNR pipeline: falloff on, walls turned inward by the
/// configured angle and the detector window applied.
SceneConfig snr_scene(const ExperimentConfig& cfg);

/// Shadow cubes, one per capture, as the reconstruct pipeline sees them:
/// calibrated empty transient minus the (optionally Poisson-sampled) light
/// transient, clamped at zero.
struct Captures {
  std::vector<TransientCube> empty;
  std::vector<TransientCube> light;
  std::vector<TransientCube> shadow;
};
Captures simulate_captures(const SceneConfig& scene, const OccupancyVolume& occupancy, const MultiplexPattern& pattern,
                           const std::optional<NoiseSpec>& noise);

/// Runs the configured pipeline and writes its artifacts plus manifest.json into
/// cfg.output_dir. On failure every file written so far is removed and an Error
/// naming the stage is thrown.
Manifest run_experiment(const ExperimentConfig& cfg);

}  // namespace twobounce
