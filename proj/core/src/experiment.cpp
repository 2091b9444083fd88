// SPDX-License-Identifier: Apache-2.0
#include "twobounce/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "rng.hpp"
#include "twobounce/analysis.hpp"
#include "twobounce/io.hpp"
#include "twobounce/parallel.hpp"
#include "twobounce/recon.hpp"
#include "twobounce/shapes.hpp"

namespace twobounce {

nlohmann::json Manifest::to_json() const {
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& a : artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  return {{"schema", kConfigSchema},
          {"pipeline", config.value("pipeline", "")},
          {"config", config},
          {"seeds", seeds},
          {"artifacts", arts},
          {"metrics", metrics}};
}

OccupancyVolume build_occupancy(const ExperimentConfig& cfg) {
  const auto& o = cfg.occupancy;
  const VoxelGrid& g = cfg.scene.grid;
  switch (o.kind) {
    case OccupancySpec::Kind::letters: return make_letter_occupancy(g, o.text, LetterPlane{o.axis, o.offset});
    case OccupancySpec::Kind::box: return make_box(g, o.box_min, o.box_max);
    case OccupancySpec::Kind::mannequin_proxy: return make_mannequin_proxy(g, o.up_axis, o.lateral_axis);
    case OccupancySpec::Kind::file: {
      OccupancyVolume v = read_volume(std::filesystem::path(o.path));
      if (v.grid.dims != g.dims) throw Error("occupancy file dims do not match the scene grid");
      v.grid = g;
      for (double& x : v.values) x = x > 0.5 ? 1.0 : 0.0;
      v.binary = true;
      return v;
    }
  }
  throw Error("unknown occupancy kind");
}

SceneConfig snr_scene(const ExperimentConfig& cfg) {
  SceneConfig s = cfg.scene;
  s.include_falloff = true;
  if (cfg.snr.wall_angle_deg != 0.0) {
    const double a = cfg.snr.wall_angle_deg * std::numbers::pi / 180.0;
    const Vec3 illum_center = s.illum_wall.origin + 0.5 * (s.illum_wall.edge_u + s.illum_wall.edge_v);
    const Vec3 obs_center = s.obs_wall.origin + 0.5 * (s.obs_wall.edge_u + s.obs_wall.edge_v);
    s.illum_wall = rotate_wall(s.illum_wall, a, obs_center);
    s.obs_wall = rotate_wall(s.obs_wall, a, illum_center);
  }
  if (cfg.snr.detector_window) {
    const auto& w = *cfg.snr.detector_window;
    s.obs_wall = restrict_wall(s.obs_wall, w[0], w[1], w[2], w[3]);
  }
  fit_time_axis(s);
  return s;
}

Captures simulate_captures(const SceneConfig& scene, const OccupancyVolume& occupancy, const MultiplexPattern& pattern,
                           const std::optional<NoiseSpec>& noise) {
  Captures c;
  for (int m = 0; m < pattern.captures(); ++m) {
    const auto row = pattern.row(m);
    TransientCube empty = empty_transient(scene, row);
    TransientCube light = light_transient(scene, occupancy, row);
    if (noise) {
      empty = scaled(empty, noise->photon_scale);
      light = poisson_sample(scaled(light, noise->photon_scale),
                             detail::splitmix64(noise->seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(m + 1))));
    }
    c.shadow.push_back(clamp_nonnegative(shadow_transient(empty, light)));
    c.empty.push_back(std::move(empty));
    c.light.push_back(std::move(light));
  }
  return c;
}

namespace {

class Run {
 public:
  explicit Run(const ExperimentConfig& cfg) : cfg_(cfg) {
    manifest_.output_dir = cfg.output_dir;
    manifest_.config = to_json(cfg);
  }

  Manifest execute() {
    try {
      stage("prepare", [&] {
        set_thread_count(cfg_.threads);
        std::error_code ec;
        std::filesystem::create_directories(cfg_.output_dir, ec);
        if (ec) throw Error("cannot create output directory " + cfg_.output_dir + ": " + ec.message());
        manifest_.seeds["pattern"] = cfg_.pattern.seed;
        manifest_.seeds["noise"] = cfg_.noise ? nlohmann::json(cfg_.noise->seed) : nlohmann::json(nullptr);
      });
      switch (cfg_.pipeline) {
        case Pipeline::simulate: simulate(false); break;
        case Pipeline::reconstruct: simulate(true); break;
        case Pipeline::sweep: sweep(); break;
        case Pipeline::snr: snr(); break;
        case Pipeline::carve_baseline: carve(); break;
      }
      stage("manifest", [&] {
        const auto path = std::filesystem::path(cfg_.output_dir) / "manifest.json";
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        written_.push_back(path);
        out << manifest_.to_json().dump(2) << '\n';
        if (!out) throw Error("failed writing " + path.string());
      });
    } catch (...) {
      for (const auto& p : written_) {
        std::error_code ec;
        std::filesystem::remove(p, ec);
      }
      throw;
    }
    return manifest_;
  }

 private:
  template <class F>
  void stage(const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      throw Error("stage " + name + ": " + e.what());
    }
  }

  std::filesystem::path path(const std::string& name) const { return std::filesystem::path(cfg_.output_dir) / name; }

  void record(const std::filesystem::path& p) {
    written_.push_back(p);
    manifest_.artifacts.push_back({std::filesystem::relative(p, cfg_.output_dir).generic_string(), sha256_file(p),
                                   std::filesystem::file_size(p)});
  }

  void save_cube(const std::string& name, const TransientCube& cube) {
    const auto p = path(name);
    written_.push_back(p);
    write_cube(p, cube);
    record(p);
  }

  void save_volume(const std::string& name, const OccupancyVolume& vol) {
    const auto p = path(name);
    written_.push_back(p);
    write_volume(p, vol);
    record(p);
  }

  void save_slices(const std::string& prefix, const OccupancyVolume& vol) {
    if (!cfg_.recon.write_slices) return;
    const auto dir = path("slices");
    for (const auto& p : write_slice_images(vol, cfg_.recon.slice_axis, dir, prefix)) record(p);
  }

  static std::string capture_name(int m, const char* what) {
    std::ostringstream s;
    s << "capture_" << std::setw(3) << std::setfill('0') << m << '_' << what << ".2btr";
    return s.str();
  }

  void simulate(bool reconstruct) {
    OccupancyVolume truth;
    MultiplexPattern pattern;
    Captures caps;
    stage("occupancy", [&] { truth = build_occupancy(cfg_); });
    stage("render", [&] {
      pattern = make_pattern(cfg_.pattern, static_cast<int>(cfg_.scene.source_count()));
      caps = simulate_captures(cfg_.scene, truth, pattern, cfg_.noise);
    });
    stage("write transients", [&] {
      save_volume("ground_truth.2bvl", truth);
      for (int m = 0; m < pattern.captures(); ++m) {
        save_cube(capture_name(m, "empty"), caps.empty[static_cast<std::size_t>(m)]);
        save_cube(capture_name(m, "light"), caps.light[static_cast<std::size_t>(m)]);
        save_cube(capture_name(m, "shadow"), caps.shadow[static_cast<std::size_t>(m)]);
      }
      double photons = 0.0;
      for (const auto& c : caps.shadow) photons += c.total();
      manifest_.metrics["captures"] = pattern.captures();
      manifest_.metrics["occupied_voxels"] = truth.count_nonzero();
      manifest_.metrics["shadow_photons"] = photons;
    });
    if (!reconstruct) return;

    const std::optional<std::uint64_t> seed =
        cfg_.noise ? std::optional<std::uint64_t>(cfg_.noise->seed) : std::nullopt;
    stage("reconstruct", [&] {
      const auto op = MeasurementOperator::build(cfg_.scene, pattern);
      const Reconstruction bp = backproject(op, caps.shadow, seed);
      const Reconstruction fbp = laplacian_filter(bp);
      const OccupancyVolume bp_mask = threshold(bp, cfg_.recon.threshold, cfg_.recon.threshold_param);
      const OccupancyVolume fbp_mask = threshold(fbp, cfg_.recon.threshold, cfg_.recon.threshold_param);
      save_volume("bp.2bvl", bp.volume);
      save_volume("fbp.2bvl", fbp.volume);
      save_volume("fbp_mask.2bvl", fbp_mask);
      save_slices("fbp", fbp.volume);
      manifest_.metrics["iou_bp"] = iou(bp_mask, truth);
      manifest_.metrics["iou_fbp"] = iou(fbp_mask, truth);
      manifest_.metrics["scene_hash"] = bp.provenance.scene_hash;
      manifest_.metrics["pattern_hash"] = bp.provenance.pattern_hash;
    });
    if (!cfg_.recon.intensity_baseline) return;
    stage("intensity baseline", [&] {
      const auto op = MeasurementOperator::build(intensity_only_scene(cfg_.scene), pattern);
      const Reconstruction bp = backproject_intensity(op, caps.shadow, seed);
      const Reconstruction fbp = laplacian_filter(bp);
      const OccupancyVolume bp_mask = threshold(bp, cfg_.recon.threshold, cfg_.recon.threshold_param);
      const OccupancyVolume fbp_mask = threshold(fbp, cfg_.recon.threshold, cfg_.recon.threshold_param);
      save_volume("intensity_fbp.2bvl", fbp.volume);
      save_slices("intensity_fbp", fbp.volume);
      manifest_.metrics["iou_intensity_bp"] = iou(bp_mask, truth);
      manifest_.metrics["iou_intensity_fbp"] = iou(fbp_mask, truth);
    });
  }

  void sweep() {
    stage("sweep", [&] {
      SweepOptions opt;
      opt.coherence.mode = cfg_.sweep.mode;
      opt.coherence.sample_columns = cfg_.sweep.sample_columns;
      opt.coherence.seed = cfg_.sweep.seed;
      opt.record_runtime = cfg_.sweep.record_runtime;
      std::vector<double> widths;
      for (double ps : cfg_.sweep.temporal_ps) widths.push_back(ps * 1e-12);
      const auto records = coherence_sweep(cfg_.scene, cfg_.sweep.spatial, widths, cfg_.sweep.captures, opt);
      const auto p = path("sweep.csv");
      written_.push_back(p);
      {
        std::ofstream out(p);
        if (!out) throw Error("cannot write " + p.string());
        write_sweep_csv(out, records);
      }
      record(p);
      std::size_t valid = 0;
      for (const auto& r : records) valid += r.valid;
      manifest_.metrics["records"] = records.size();
      manifest_.metrics["valid_records"] = valid;
      manifest_.metrics["coherence_mode"] = cfg_.sweep.mode == CoherenceOptions::Mode::exact ? "exact" : "sampled";
    });
  }

  void snr() {
    stage("snr", [&] {
      const SceneConfig scene = snr_scene(cfg_);
      const SnrMap literal = snr_map(scene);
      const SnrMap shadow = shadow_snr_map(scene);
      save_volume("snr.2bvl", literal.as_volume());
      save_volume("shadow_snr.2bvl", shadow.as_volume());
      save_slices("shadow_snr", shadow.as_volume());
      auto idx = [&](std::size_t v) {
        const auto a = scene.grid.unravel(v);
        return nlohmann::json::array({a[0], a[1], a[2]});
      };
      manifest_.metrics["total_photons"] = literal.total_photons;
      manifest_.metrics["snr_max"] = literal.max();
      manifest_.metrics["snr_argmax"] = idx(literal.argmax());
      manifest_.metrics["shadow_snr_max"] = shadow.max();
      manifest_.metrics["shadow_snr_argmax"] = idx(shadow.argmax());
    });
  }

  void carve() {
    OccupancyVolume truth;
    stage("occupancy", [&] { truth = build_occupancy(cfg_); });
    stage("carve", [&] {
      const auto& scene = cfg_.scene;
      const int k_count = static_cast<int>(scene.source_count());
      std::vector<std::vector<std::uint8_t>> masks;
      for (int k = 0; k < k_count; ++k) {
        std::vector<std::uint8_t> row(static_cast<std::size_t>(k_count), 0);
        row[static_cast<std::size_t>(k)] = 1;
        TransientCube empty = empty_transient(scene, row);
        TransientCube light = light_transient(scene, truth, row);
        if (cfg_.noise) {
          empty = scaled(empty, cfg_.noise->photon_scale);
          light = poisson_sample(scaled(light, cfg_.noise->photon_scale),
                                 detail::splitmix64(cfg_.noise->seed ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(k + 1))));
        }
        masks.push_back(shadow_mask(intensity_projection(empty), intensity_projection(light)));
      }
      const OccupancyVolume hull = voxel_carve(scene, masks);
      save_volume("ground_truth.2bvl", truth);
      save_volume("hull.2bvl", hull);
      save_slices("hull", hull);
      std::size_t missed = 0;
      for (std::size_t v = 0; v < hull.size(); ++v) missed += truth.values[v] != 0.0 && hull.values[v] == 0.0;
      manifest_.metrics["iou_hull"] = iou(hull, truth);
      manifest_.metrics["hull_voxels"] = hull.count_nonzero();
      manifest_.metrics["false_negative_voxels"] = missed;
    });
  }

  const ExperimentConfig& cfg_;
  Manifest manifest_;
  std::vector<std::filesystem::path> written_;
};

}  // namespace

Manifest run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  return Run(cfg).execute();
}

}  // namespace twobounce
