// SPDX-License-Identifier: Apache-2.0
#include "twobounce/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "twobounce/shapes.hpp"

namespace twobounce {

using nlohmann::json;

const char* to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::simulate: return "simulate";
    case Pipeline::reconstruct: return "reconstruct";
    case Pipeline::sweep: return "sweep";
    case Pipeline::snr: return "snr";
    case Pipeline::carve_baseline: return "carve_baseline";
  }
  return "unknown";
}

Pipeline parse_pipeline(const std::string& name) {
  for (auto p : {Pipeline::simulate, Pipeline::reconstruct, Pipeline::sweep, Pipeline::snr, Pipeline::carve_baseline}) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("pipeline: unknown value \"" + name + "\"");
}

namespace {

const char* occupancy_name(OccupancySpec::Kind k) {
  switch (k) {
    case OccupancySpec::Kind::letters: return "letters";
    case OccupancySpec::Kind::box: return "box";
    case OccupancySpec::Kind::mannequin_proxy: return "mannequin_proxy";
    case OccupancySpec::Kind::file: return "file";
  }
  return "unknown";
}

const char* pattern_name(PatternSpec::Kind k) {
  switch (k) {
    case PatternSpec::Kind::identity: return "identity";
    case PatternSpec::Kind::blocks: return "blocks";
    case PatternSpec::Kind::strided: return "strided";
    case PatternSpec::Kind::random: return "random";
  }
  return "unknown";
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
  }

  void skip(const std::string& key) { seen_.insert(key); }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + "missing required key");
    return j_.at(key);
  }

  Reader child(const std::string& key) { return Reader(raw(key), join(key)); }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : mark(key, fallback); }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return mark(key, fallback);
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(where(key) + "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return mark(key, fallback);
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : mark(key, fallback);
  }

  Vec3 vec3(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(where(key) + "expected an array of 3 numbers");
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
      if (!v[static_cast<std::size_t>(a)].is_number()) throw ConfigError(where(key) + "expected an array of 3 numbers");
      out[a] = v[static_cast<std::size_t>(a)].get<double>();
    }
    return out;
  }

  template <class T>
  std::vector<T> list(const std::string& key) {
    if (!has(key)) {
      seen_.insert(key);
      return {};
    }
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + "expected an array");
    std::vector<T> out;
    for (const auto& e : v) {
      if (!e.is_number() || (std::is_integral_v<T> && !e.is_number_integer())) {
        throw ConfigError(where(key) + "expected an array of " + (std::is_integral_v<T> ? "integers" : "numbers"));
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where(const std::string& key) const { return (key.empty() ? path_ : join(key)) + ": "; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key \"" + join(key) + "\"");
    }
  }

 private:
  template <class T>
  T mark(const std::string& key, T value) {
    seen_.insert(key);
    return value;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int positive_int(Reader& r, const std::string& key) {
  const long long v = r.integer(key);
  if (v < 1 || v > std::numeric_limits<int>::max()) throw ConfigError(r.where(key) + "must be a positive integer");
  return static_cast<int>(v);
}

RelayWall read_wall(Reader r) {
  RelayWall w;
  w.origin = r.vec3("origin");
  w.edge_u = r.vec3("edge_u");
  w.edge_v = r.vec3("edge_v");
  w.grid_u = positive_int(r, "grid_u");
  w.grid_v = positive_int(r, "grid_v");
  r.finish();
  return w;
}

Vec3 default_standoff(const SceneConfig& s) {
  const Vec3 mid = 0.5 * (s.illum_wall.origin + 0.5 * (s.illum_wall.edge_u + s.illum_wall.edge_v) + s.obs_wall.origin +
                          0.5 * (s.obs_wall.edge_u + s.obs_wall.edge_v));
  const Vec3 u = s.obs_wall.edge_u.normalized();
  return mid - u * (u.dot(mid - s.grid.origin) + 1.0);
}

SceneConfig read_scene(Reader r) {
  SceneConfig s;
  s.illum_wall = read_wall(r.child("illum_wall"));
  s.obs_wall = read_wall(r.child("obs_wall"));
  {
    Reader g = r.child("grid");
    s.grid.origin = g.vec3("origin");
    s.grid.voxel_size = g.number("voxel_size");
    const auto dims = g.list<long long>("dims");
    if (dims.size() != 3) throw ConfigError(g.where("dims") + "expected an array of 3 integers");
    for (std::size_t a = 0; a < 3; ++a) {
      if (dims[a] < 1 || dims[a] > std::numeric_limits<int>::max()) throw ConfigError(g.where("dims") + "entries must be positive");
      s.grid.dims[a] = static_cast<int>(dims[a]);
    }
    if (!(s.grid.voxel_size > 0.0)) throw ConfigError(g.where("voxel_size") + "must be positive");
    g.finish();
  }
  s.laser_origin = r.has("laser_origin") ? r.vec3("laser_origin") : default_standoff(s);
  s.camera_origin = r.has("camera_origin") ? r.vec3("camera_origin") : default_standoff(s);
  r.skip("laser_origin");
  r.skip("camera_origin");
  s.laser_intensity = r.number("laser_intensity", 1.0);
  if (!(s.laser_intensity > 0.0)) throw ConfigError(r.where("laser_intensity") + "must be positive");
  s.include_falloff = r.boolean("include_falloff", false);
  s.include_camera_leg = r.boolean("include_camera_leg", false);

  bool fit_offset = true;
  bool fit_bins = true;
  if (r.has("time")) {
    Reader t = r.child("time");
    s.time.bin_width = t.number("bin_width", 10e-12);
    if (!(s.time.bin_width > 0.0)) throw ConfigError(t.where("bin_width") + "must be positive");
    if (t.has("t_offset")) {
      s.time.t_offset = t.number("t_offset");
      fit_offset = false;
    } else {
      t.number("t_offset", 0.0);
    }
    if (t.has("n_bins")) {
      s.time.n_bins = positive_int(t, "n_bins");
      fit_bins = false;
    } else {
      t.integer("n_bins", 0);
    }
    t.finish();
  } else {
    r.skip("time");
  }
  try {
    s.validate();
    if (fit_offset) s.time.t_offset = default_time_offset(s);
    if (fit_bins) s.time.n_bins = covering_bin_count(s);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  r.finish();
  return s;
}

std::array<int, 3> int3(Reader& r, const std::string& key) {
  const auto v = r.list<long long>(key);
  if (v.size() != 3) throw ConfigError(r.where(key) + "expected an array of 3 integers");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

OccupancySpec read_occupancy(Reader r) {
  OccupancySpec o;
  const std::string type = r.string("type");
  if (type == "letters") {
    o.kind = OccupancySpec::Kind::letters;
    o.text = r.string("text");
    o.axis = static_cast<int>(r.integer("axis", 1));
    o.offset = static_cast<int>(r.integer("offset", 0));
  } else if (type == "box") {
    o.kind = OccupancySpec::Kind::box;
    o.box_min = int3(r, "min");
    o.box_max = int3(r, "max");
  } else if (type == "mannequin_proxy") {
    o.kind = OccupancySpec::Kind::mannequin_proxy;
    o.up_axis = static_cast<int>(r.integer("up_axis", 1));
    o.lateral_axis = static_cast<int>(r.integer("lateral_axis", 2));
  } else if (type == "file") {
    o.kind = OccupancySpec::Kind::file;
    o.path = r.string("path");
  } else {
    throw ConfigError(r.where("type") + "unknown occupancy type \"" + type + "\"");
  }
  r.finish();
  return o;
}

PatternSpec read_pattern(Reader r) {
  PatternSpec p;
  const std::string type = r.string("type");
  if (type == "identity") {
    p.kind = PatternSpec::Kind::identity;
  } else if (type == "blocks") {
    p.kind = PatternSpec::Kind::blocks;
  } else if (type == "strided") {
    p.kind = PatternSpec::Kind::strided;
  } else if (type == "random") {
    p.kind = PatternSpec::Kind::random;
  } else {
    throw ConfigError(r.where("type") + "unknown pattern type \"" + type + "\"");
  }
  p.M = static_cast<int>(r.integer("M", 1));
  p.seed = r.u64("seed", 0);
  r.finish();
  return p;
}

ThresholdMethod parse_threshold(const std::string& s, const Reader& r) {
  if (s == "fraction_of_max") return ThresholdMethod::fraction_of_max;
  if (s == "otsu") return ThresholdMethod::otsu;
  throw ConfigError(r.where("threshold") + "unknown threshold method \"" + s + "\"");
}

int axis_value(Reader& r, const std::string& key, int fallback) {
  const long long a = r.integer(key, fallback);
  if (a < 0 || a > 2) throw ConfigError(r.where(key) + "must be 0, 1 or 2");
  return static_cast<int>(a);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  Reader r(doc, "");
  const long long schema = r.integer("schema");
  if (schema != kConfigSchema) throw ConfigError("schema: unsupported version " + std::to_string(schema));

  ExperimentConfig cfg;
  cfg.scene = read_scene(r.child("scene"));
  cfg.pipeline = parse_pipeline(r.string("pipeline", "simulate"));
  cfg.output_dir = r.string("output_dir", "out");
  const long long threads = r.integer("threads", 0);
  if (threads < 0) throw ConfigError("threads: must be nonnegative");
  cfg.threads = static_cast<unsigned>(threads);

  if (r.has("occupancy")) {
    cfg.occupancy = read_occupancy(r.child("occupancy"));
  } else {
    r.skip("occupancy");
  }
  if (r.has("pattern_spec")) {
    cfg.pattern = read_pattern(r.child("pattern_spec"));
  } else {
    r.skip("pattern_spec");
  }
  if (cfg.pattern.kind == PatternSpec::Kind::identity) cfg.pattern.M = static_cast<int>(cfg.scene.source_count());

  if (r.has("noise")) {
    Reader n = r.child("noise");
    NoiseSpec noise;
    noise.photon_scale = n.number("photon_scale", 1.0);
    noise.seed = n.u64("seed", 0);
    if (!(noise.photon_scale > 0.0)) throw ConfigError(n.where("photon_scale") + "must be positive");
    n.finish();
    cfg.noise = noise;
  } else {
    r.skip("noise");
  }

  if (r.has("recon")) {
    Reader rc = r.child("recon");
    cfg.recon.threshold = parse_threshold(rc.string("threshold", "fraction_of_max"), rc);
    cfg.recon.threshold_param = rc.number("threshold_param", 0.5);
    cfg.recon.intensity_baseline = rc.boolean("intensity_baseline", true);
    cfg.recon.write_slices = rc.boolean("write_slices", true);
    cfg.recon.slice_axis = axis_value(rc, "slice_axis", 2);
    rc.finish();
  } else {
    r.skip("recon");
  }

  if (r.has("sweep")) {
    Reader sw = r.child("sweep");
    cfg.sweep.spatial = sw.list<int>("spatial");
    cfg.sweep.temporal_ps = sw.list<double>("temporal_ps");
    cfg.sweep.captures = sw.list<int>("captures");
    const std::string mode = sw.string("coherence_mode", "exact");
    if (mode == "exact") {
      cfg.sweep.mode = CoherenceOptions::Mode::exact;
    } else if (mode == "sampled") {
      cfg.sweep.mode = CoherenceOptions::Mode::sampled;
    } else {
      throw ConfigError(sw.where("coherence_mode") + "expected \"exact\" or \"sampled\"");
    }
    const long long cols = sw.integer("sample_columns", 256);
    if (cols < 1) throw ConfigError(sw.where("sample_columns") + "must be positive");
    cfg.sweep.sample_columns = static_cast<std::size_t>(cols);
    cfg.sweep.seed = sw.u64("seed", 0);
    cfg.sweep.record_runtime = sw.boolean("record_runtime", false);
    sw.finish();
  } else {
    r.skip("sweep");
  }

  if (r.has("snr")) {
    Reader sn = r.child("snr");
    cfg.snr.wall_angle_deg = sn.number("wall_angle_deg", 0.0);
    if (sn.has("detector_window")) {
      const auto w = sn.list<int>("detector_window");
      if (w.size() != 4) throw ConfigError(sn.where("detector_window") + "expected [u0, u1, v0, v1]");
      cfg.snr.detector_window = std::array<int, 4>{w[0], w[1], w[2], w[3]};
    } else {
      sn.skip("detector_window");
    }
    sn.finish();
  } else {
    r.skip("snr");
  }
  r.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const ExperimentConfig& cfg) {
  try {
    cfg.scene.validate();
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  const int k = static_cast<int>(cfg.scene.source_count());
  if (cfg.pattern.M > k) throw ConfigError("pattern_spec.M exceeds source count");
  if (cfg.pattern.M < 1) throw ConfigError("pattern_spec.M must be at least 1");

  const auto& o = cfg.occupancy;
  try {
    switch (o.kind) {
      case OccupancySpec::Kind::letters:
        make_letter_occupancy(cfg.scene.grid, o.text, LetterPlane{o.axis, o.offset});
        break;
      case OccupancySpec::Kind::mannequin_proxy:
        make_mannequin_proxy(cfg.scene.grid, o.up_axis, o.lateral_axis);
        break;
      case OccupancySpec::Kind::file:
        if (!std::filesystem::exists(o.path)) throw ConfigError("occupancy.path: file \"" + o.path + "\" does not exist");
        break;
      case OccupancySpec::Kind::box:
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("occupancy: ") + e.what());
  }

  if (cfg.pipeline == Pipeline::sweep) {
    if (cfg.sweep.spatial.empty() || cfg.sweep.temporal_ps.empty() || cfg.sweep.captures.empty()) {
      throw ConfigError("sweep: spatial, temporal_ps and captures must all be nonempty");
    }
    for (int m : cfg.sweep.captures) {
      if (m < 1 || m > k) throw ConfigError("sweep.captures: entry " + std::to_string(m) + " outside [1, K]");
    }
    for (int n : cfg.sweep.spatial) {
      if (n < 1) throw ConfigError("sweep.spatial: entries must be positive");
    }
    for (double t : cfg.sweep.temporal_ps) {
      if (!(t > 0.0)) throw ConfigError("sweep.temporal_ps: entries must be positive");
    }
  }
  if (cfg.snr.detector_window) {
    const auto& w = *cfg.snr.detector_window;
    if (w[0] < 0 || w[1] > cfg.scene.obs_wall.grid_u || w[0] >= w[1] || w[2] < 0 || w[3] > cfg.scene.obs_wall.grid_v ||
        w[2] >= w[3]) {
      throw ConfigError("snr.detector_window: must be a nonempty sub-rectangle of the detector grid");
    }
  }
}

namespace {

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json wall_json(const RelayWall& w) {
  return {{"origin", vec(w.origin)}, {"edge_u", vec(w.edge_u)}, {"edge_v", vec(w.edge_v)},
          {"grid_u", w.grid_u},      {"grid_v", w.grid_v}};
}

}  // namespace

json scene_to_json(const SceneConfig& s) {
  return {
      {"laser_origin", vec(s.laser_origin)},
      {"camera_origin", vec(s.camera_origin)},
      {"illum_wall", wall_json(s.illum_wall)},
      {"obs_wall", wall_json(s.obs_wall)},
      {"grid", {{"origin", vec(s.grid.origin)}, {"voxel_size", s.grid.voxel_size}, {"dims", s.grid.dims}}},
      {"time", {{"bin_width", s.time.bin_width}, {"n_bins", s.time.n_bins}, {"t_offset", s.time.t_offset}}},
      {"laser_intensity", s.laser_intensity},
      {"include_falloff", s.include_falloff},
      {"include_camera_leg", s.include_camera_leg},
  };
}

json to_json(const ExperimentConfig& cfg) {
  json occ = {{"type", occupancy_name(cfg.occupancy.kind)}};
  switch (cfg.occupancy.kind) {
    case OccupancySpec::Kind::letters:
      occ["text"] = cfg.occupancy.text;
      occ["axis"] = cfg.occupancy.axis;
      occ["offset"] = cfg.occupancy.offset;
      break;
    case OccupancySpec::Kind::box:
      occ["min"] = cfg.occupancy.box_min;
      occ["max"] = cfg.occupancy.box_max;
      break;
    case OccupancySpec::Kind::mannequin_proxy:
      occ["up_axis"] = cfg.occupancy.up_axis;
      occ["lateral_axis"] = cfg.occupancy.lateral_axis;
      break;
    case OccupancySpec::Kind::file:
      occ["path"] = cfg.occupancy.path;
      break;
  }
  json doc = {
      {"schema", kConfigSchema},
      {"pipeline", to_string(cfg.pipeline)},
      {"output_dir", cfg.output_dir},
      {"threads", cfg.threads},
      {"scene", scene_to_json(cfg.scene)},
      {"occupancy", occ},
      {"pattern_spec", {{"type", pattern_name(cfg.pattern.kind)}, {"M", cfg.pattern.M}, {"seed", cfg.pattern.seed}}},
      {"noise", nullptr},
      {"recon",
       {{"threshold", cfg.recon.threshold == ThresholdMethod::otsu ? "otsu" : "fraction_of_max"},
        {"threshold_param", cfg.recon.threshold_param},
        {"intensity_baseline", cfg.recon.intensity_baseline},
        {"write_slices", cfg.recon.write_slices},
        {"slice_axis", cfg.recon.slice_axis}}},
      {"sweep",
       {{"spatial", cfg.sweep.spatial},
        {"temporal_ps", cfg.sweep.temporal_ps},
        {"captures", cfg.sweep.captures},
        {"coherence_mode", cfg.sweep.mode == CoherenceOptions::Mode::exact ? "exact" : "sampled"},
        {"sample_columns", cfg.sweep.sample_columns},
        {"seed", cfg.sweep.seed},
        {"record_runtime", cfg.sweep.record_runtime}}},
      {"snr", {{"wall_angle_deg", cfg.snr.wall_angle_deg}, {"detector_window", nullptr}}},
  };
  if (cfg.noise) doc["noise"] = {{"photon_scale", cfg.noise->photon_scale}, {"seed", cfg.noise->seed}};
  if (cfg.snr.detector_window) doc["snr"]["detector_window"] = *cfg.snr.detector_window;
  return doc;
}

std::string serialize_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

MultiplexPattern make_pattern(const PatternSpec& spec, int sources) {
  switch (spec.kind) {
    case PatternSpec::Kind::identity: return MultiplexPattern::identity(sources);
    case PatternSpec::Kind::blocks: return MultiplexPattern::blocks(sources, spec.M);
    case PatternSpec::Kind::strided: return MultiplexPattern::strided(sources, spec.M);
    case PatternSpec::Kind::random: return MultiplexPattern::random(sources, spec.M, spec.seed);
  }
  throw Error("unknown pattern kind");
}

}  // namespace twobounce
