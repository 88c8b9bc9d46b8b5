#pragma once

// Run configuration: one JSON document. Angles are in degrees, everything
// else SI. Unknown keys are rejected so typos surface as errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rae/compounding.hpp"
#include "rae/errors.hpp"
#include "rae/io/csv.hpp"
#include "rae/odometry.hpp"
#include "rae/simulate.hpp"

namespace rae::io {

using Json = nlohmann::ordered_json;

struct CentralSelection {
  bool centroid = false;
  int index = 0;  // 1-based; 0 = command default
};

struct MonteCarloConfig {
  std::string scenario = "wall";  // wall | pushbroom
  std::size_t samples = 100000;
  std::optional<std::uint64_t> seed;
  double covariance_scale = 1.0;  // multiplies the analytic covariance under test
  std::optional<int> offset;      // measurement pose index minus central index
  std::optional<int> ray;         // pushbroom ray; default the middle one
  double anees_lower = 0.97;
  double anees_upper = 1.03;
  bool coverage = false;
  double coverage_range = 10.0;
  double coverage_azimuth = 0.0;    // rad after loading
  double coverage_elevation = 0.0;  // rad after loading
};

struct EnvelopeConfig {
  double level = 3.0;
  std::optional<int> resolution;  // default 64 in 2D, 24 in 3D
  std::string points;             // cmd_envelope input
  std::size_t stride = 100;       // pushbroom: envelope every stride-th point
  bool obj = true;
};

struct InputsConfig {
  std::string trajectory;
  std::string scans;
  std::string extrinsics;
  bool present() const { return !trajectory.empty() || !scans.empty() || !extrinsics.empty(); }
};

// Optional noise keys; the per-dimension defaults fill whatever is absent.
struct NoiseOverrides {
  std::optional<double> sigma_r, sigma_bearing, sigma_azimuth, sigma_elevation;
  std::optional<double> sigma_alpha, sigma_beta, delta;
  std::optional<double> psd_gyro, psd_wheel, psd_omega_dot, psd_nu_dot;
};

struct RunConfig {
  std::string path;  // empty when built in memory
  std::filesystem::path base_dir = ".";
  NoiseOverrides noise;
  CentralSelection central;
  SlotOrder slot_order = SlotOrder::perpendicular_axes;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool has_wall = false, has_pushbroom = false;
  WallScenarioSpec wall;
  PushBroomScenarioSpec pushbroom;
  bool wall_noise = false, pushbroom_noise = false;
  InputsConfig inputs;
  MonteCarloConfig montecarlo;
  EnvelopeConfig envelope;

  // Push the noise block and global settings into the scenario specs.
  void resolve() {
    auto& w = wall;
    w.noise.sigma_range = noise.sigma_r.value_or(1e-2);
    w.noise.sigma_azimuth = noise.sigma_bearing.value_or(deg_to_rad(5.0));
    w.noise.sigma_elevation = 0.0;
    w.noise.delta = noise.delta.value_or(1e-5);
    w.sigma_alpha = noise.sigma_alpha.value_or(deg_to_rad(1.0));
    w.sigma_beta = noise.sigma_beta.value_or(5e-3);
    w.psd = {noise.psd_gyro.value_or(1e-4), noise.psd_wheel.value_or(1e-4)};
    w.seed = seed;
    if (!central.centroid && central.index > 0) w.central_pose = central.index;

    auto& p = pushbroom;
    p.noise.sigma_range = noise.sigma_r.value_or(1e-2);
    p.noise.sigma_azimuth = noise.sigma_azimuth.value_or(deg_to_rad(3.0));
    p.noise.sigma_elevation = noise.sigma_elevation.value_or(deg_to_rad(0.1));
    p.noise.delta = noise.delta.value_or(1e-5);
    p.sigma_alpha = noise.sigma_alpha.value_or(deg_to_rad(0.1));
    p.sigma_beta = noise.sigma_beta.value_or(5e-3);
    p.psd = {noise.psd_omega_dot.value_or(9e-6), noise.psd_nu_dot.value_or(1e-8)};
    p.seed = seed;
  }

  void validate() const {
    if (inputs.present() && (has_wall || has_pushbroom))
      throw ValidationError("config: give either a scenario block or an inputs block, not both");
    wall.noise.validate(false);
    pushbroom.noise.validate(true);
    for (double s : {wall.sigma_alpha, wall.sigma_beta, pushbroom.sigma_alpha, pushbroom.sigma_beta}) {
      if (!(s > 0.0)) throw ValidationError("config: extrinsic sigmas must be positive");
    }
    for (double q : {wall.psd.gyro, wall.psd.wheel, pushbroom.psd.rotational, pushbroom.psd.translational}) {
      if (!(q >= 0.0)) throw ValidationError("config: PSDs must be non-negative");
    }
    if (montecarlo.samples < 1000) throw ValidationError("config: montecarlo.samples must be at least 1000");
    if (!(montecarlo.covariance_scale > 0.0)) throw ValidationError("config: montecarlo.covariance_scale must be positive");
    if (!(envelope.level > 0.0)) throw ValidationError("config: envelope.level must be positive");
    if (envelope.resolution && *envelope.resolution < 16)
      throw ValidationError("config: envelope.resolution must be at least 16");
    if (envelope.stride < 1) throw ValidationError("config: envelope.stride must be at least 1");
    if (threads < 1) throw ValidationError("config: threads must be at least 1");
  }

  std::string resolve_path(const std::string& p) const {
    if (p.empty()) return p;
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (base_dir / fp).lexically_normal().string();
  }
};

inline SlotOrder parse_slot_order(std::string_view s) {
  if (s == "perp-axes" || s == "perpendicular_axes") return SlotOrder::perpendicular_axes;
  if (s == "paper-literal" || s == "paper_literal") return SlotOrder::paper_literal;
  throw ValidationError("slot_order must be 'perp-axes' or 'paper-literal', got '" + std::string(s) + "'");
}

inline std::string_view slot_order_name(SlotOrder o) {
  return o == SlotOrder::perpendicular_axes ? "perp-axes" : "paper-literal";
}

namespace detail {

struct Location {
  std::size_t line = 0, column = 0;
};

inline Location locate_offset(std::string_view text, std::size_t offset) {
  Location loc{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

// Line of the last key of `path`, found by scanning for each key in turn.
inline std::size_t locate_key(std::string_view text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t at = pos;
    while (true) {
      at = text.find(quoted, at);
      if (at == std::string_view::npos) return 0;
      std::size_t after = at + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      at += quoted.size();
    }
    pos = at + quoted.size();
  }
  return locate_offset(text, pos).line;
}

class Reader {
 public:
  Reader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string dotted;
    for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
    std::ostringstream os;
    os << source_;
    if (const std::size_t line = locate_key(text_, path)) os << ":" << line;
    os << ": '" << dotted << "': " << msg;
    throw ValidationError(os.str());
  }

  void allow(const Json& obj, const std::vector<std::string>& path, const std::set<std::string>& keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (!keys.count(k)) {
        auto p = path;
        p.push_back(k);
        fail(p, "unknown key");
      }
    }
  }

  double number(const Json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  double positive(const Json& v, const std::vector<std::string>& path) const {
    const double d = number(v, path);
    if (!(d > 0.0)) fail(path, "must be positive");
    return d;
  }

  long long integer(const Json& v, const std::vector<std::string>& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const Json& v, const std::vector<std::string>& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const Json& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  template <int D>
  Eigen::Matrix<double, D, 1> vector(const Json& v, const std::vector<std::string>& path) const {
    if (!v.is_array() || v.size() != D) fail(path, "expected an array of " + std::to_string(D) + " numbers");
    Eigen::Matrix<double, D, 1> out;
    for (int i = 0; i < D; ++i) out(i) = number(v[i], path);
    return out;
  }

 private:
  std::string_view text_;
  std::string source_;
};

}  // namespace detail

inline RunConfig parse_config(std::string_view text, const std::string& source = "<config>") {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const auto loc = detail::locate_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << source << ":" << loc.line << ":" << loc.column << ": invalid JSON";
    throw ParseError(os.str(), loc.line);
  }
  detail::Reader rd(text, source);
  RunConfig cfg;
  rd.allow(root, {}, {"sigma_r", "sigma_bearing", "sigma_azimuth", "sigma_elevation", "sigma_alpha", "sigma_beta",
                      "delta", "psd_gyro", "psd_wheel", "psd_omega_dot", "psd_nu_dot", "central_pose", "slot_order",
                      "seed", "threads", "wall", "pushbroom", "inputs", "montecarlo", "envelope"});

  auto& n = cfg.noise;
  auto opt = [&](const char* key, std::optional<double>& dst, bool angle) {
    if (root.contains(key)) {
      const double v = rd.positive(root[key], {key});
      dst = angle ? deg_to_rad(v) : v;
    }
  };
  opt("sigma_r", n.sigma_r, false);
  opt("sigma_bearing", n.sigma_bearing, true);
  opt("sigma_azimuth", n.sigma_azimuth, true);
  opt("sigma_elevation", n.sigma_elevation, true);
  opt("sigma_alpha", n.sigma_alpha, true);
  opt("sigma_beta", n.sigma_beta, false);
  opt("delta", n.delta, false);
  for (const char* key : {"psd_gyro", "psd_wheel", "psd_omega_dot", "psd_nu_dot"}) {
    if (!root.contains(key)) continue;
    const double v = rd.number(root[key], {key});
    if (!(v >= 0.0)) rd.fail({key}, "must be non-negative");
    std::string_view k(key);
    (k == "psd_gyro" ? n.psd_gyro : k == "psd_wheel" ? n.psd_wheel : k == "psd_omega_dot" ? n.psd_omega_dot : n.psd_nu_dot) = v;
  }

  if (root.contains("central_pose")) {
    const auto& v = root["central_pose"];
    if (v.is_string() && v.get<std::string>() == "centroid") {
      cfg.central.centroid = true;
    } else if (v.is_number_integer() && v.get<long long>() >= 1) {
      cfg.central.index = static_cast<int>(v.get<long long>());
    } else {
      rd.fail({"central_pose"}, "expected a 1-based index or \"centroid\"");
    }
  }
  if (root.contains("slot_order")) {
    try {
      cfg.slot_order = parse_slot_order(rd.string(root["slot_order"], {"slot_order"}));
    } catch (const ValidationError& e) {
      rd.fail({"slot_order"}, e.what());
    }
  }
  if (root.contains("seed")) {
    const auto& v = root["seed"];
    if (!v.is_number_unsigned()) rd.fail({"seed"}, "expected a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  if (root.contains("threads")) {
    const long long t = rd.integer(root["threads"], {"threads"});
    if (t < 1) rd.fail({"threads"}, "must be at least 1");
    cfg.threads = static_cast<unsigned>(t);
  }

  if (root.contains("wall")) {
    const auto& w = root["wall"];
    rd.allow(w, {"wall"}, {"wall_offset", "x_start", "x_end", "speed", "spacing", "mount_yaw", "mount_offset",
                           "beam_bearing", "measurement_noise"});
    cfg.has_wall = true;
    auto& s = cfg.wall;
    if (w.contains("wall_offset")) s.wall_offset = rd.number(w["wall_offset"], {"wall", "wall_offset"});
    if (w.contains("x_start")) s.x_start = rd.number(w["x_start"], {"wall", "x_start"});
    if (w.contains("x_end")) s.x_end = rd.number(w["x_end"], {"wall", "x_end"});
    if (w.contains("speed")) s.speed = rd.positive(w["speed"], {"wall", "speed"});
    if (w.contains("spacing")) s.spacing = rd.positive(w["spacing"], {"wall", "spacing"});
    if (w.contains("mount_yaw")) s.mount_yaw = deg_to_rad(rd.number(w["mount_yaw"], {"wall", "mount_yaw"}));
    if (w.contains("mount_offset")) s.mount_offset = rd.vector<2>(w["mount_offset"], {"wall", "mount_offset"});
    if (w.contains("beam_bearing")) s.beam_bearing = deg_to_rad(rd.number(w["beam_bearing"], {"wall", "beam_bearing"}));
    if (w.contains("measurement_noise")) cfg.wall_noise = rd.boolean(w["measurement_noise"], {"wall", "measurement_noise"});
    if (!(s.x_end > s.x_start)) rd.fail({"wall", "x_end"}, "must exceed x_start");
  }

  if (root.contains("pushbroom")) {
    const auto& p = root["pushbroom"];
    rd.allow(p, {"pushbroom"}, {"speed", "leg_length", "legs", "leg_spacing", "profile_rate", "beam_width",
                                "rays_per_profile", "max_range", "depth", "amplitude", "wavelength",
                                "mount_offset", "measurement_noise"});
    cfg.has_pushbroom = true;
    auto& s = cfg.pushbroom;
    auto pos = [&](const char* key, double& dst) {
      if (p.contains(key)) dst = rd.positive(p[key], {"pushbroom", key});
    };
    pos("speed", s.speed);
    pos("leg_length", s.leg_length);
    pos("leg_spacing", s.leg_spacing);
    pos("profile_rate", s.profile_rate);
    pos("max_range", s.max_range);
    pos("depth", s.surface.depth);
    pos("wavelength", s.surface.wavelength);
    if (p.contains("amplitude")) s.surface.amplitude = rd.number(p["amplitude"], {"pushbroom", "amplitude"});
    if (p.contains("beam_width")) {
      s.beam_width = deg_to_rad(rd.positive(p["beam_width"], {"pushbroom", "beam_width"}));
      if (!(s.beam_width < std::numbers::pi)) rd.fail({"pushbroom", "beam_width"}, "must be below 180 degrees");
    }
    if (p.contains("legs")) {
      const long long v = rd.integer(p["legs"], {"pushbroom", "legs"});
      if (v < 1) rd.fail({"pushbroom", "legs"}, "must be at least 1");
      s.legs = static_cast<int>(v);
    }
    if (p.contains("rays_per_profile")) {
      const long long v = rd.integer(p["rays_per_profile"], {"pushbroom", "rays_per_profile"});
      if (v < 1) rd.fail({"pushbroom", "rays_per_profile"}, "must be at least 1");
      s.rays_per_profile = static_cast<int>(v);
    }
    if (p.contains("mount_offset")) {
      s.mount = Pose3(s.mount.rotation(), rd.vector<3>(p["mount_offset"], {"pushbroom", "mount_offset"}));
    }
    if (p.contains("measurement_noise"))
      cfg.pushbroom_noise = rd.boolean(p["measurement_noise"], {"pushbroom", "measurement_noise"});
  }

  if (root.contains("inputs")) {
    const auto& in = root["inputs"];
    rd.allow(in, {"inputs"}, {"trajectory", "scans", "extrinsics"});
    for (const char* key : {"trajectory", "scans", "extrinsics"}) {
      if (!in.contains(key)) rd.fail({"inputs"}, std::string("missing '") + key + "'");
    }
    cfg.inputs.trajectory = rd.string(in["trajectory"], {"inputs", "trajectory"});
    cfg.inputs.scans = rd.string(in["scans"], {"inputs", "scans"});
    cfg.inputs.extrinsics = rd.string(in["extrinsics"], {"inputs", "extrinsics"});
  }

  if (root.contains("montecarlo")) {
    const auto& m = root["montecarlo"];
    rd.allow(m, {"montecarlo"}, {"scenario", "samples", "seed", "covariance_scale", "offset", "ray", "anees_band",
                                 "coverage_comparison"});
    auto& mc = cfg.montecarlo;
    if (m.contains("scenario")) {
      mc.scenario = rd.string(m["scenario"], {"montecarlo", "scenario"});
      if (mc.scenario != "wall" && mc.scenario != "pushbroom")
        rd.fail({"montecarlo", "scenario"}, "expected \"wall\" or \"pushbroom\"");
    }
    if (m.contains("samples")) {
      const long long v = rd.integer(m["samples"], {"montecarlo", "samples"});
      if (v < 1000) rd.fail({"montecarlo", "samples"}, "must be at least 1000");
      mc.samples = static_cast<std::size_t>(v);
    }
    if (m.contains("seed")) {
      if (!m["seed"].is_number_unsigned()) rd.fail({"montecarlo", "seed"}, "expected a non-negative integer");
      mc.seed = m["seed"].get<std::uint64_t>();
    }
    if (m.contains("covariance_scale"))
      mc.covariance_scale = rd.positive(m["covariance_scale"], {"montecarlo", "covariance_scale"});
    if (m.contains("offset")) mc.offset = static_cast<int>(rd.integer(m["offset"], {"montecarlo", "offset"}));
    if (m.contains("ray")) mc.ray = static_cast<int>(rd.integer(m["ray"], {"montecarlo", "ray"}));
    if (m.contains("anees_band")) {
      const auto band = rd.vector<2>(m["anees_band"], {"montecarlo", "anees_band"});
      if (!(band(0) < band(1))) rd.fail({"montecarlo", "anees_band"}, "lower bound must be below upper bound");
      mc.anees_lower = band(0);
      mc.anees_upper = band(1);
    }
    if (m.contains("coverage_comparison")) {
      const auto& c = m["coverage_comparison"];
      if (c.is_boolean()) {
        mc.coverage = c.get<bool>();
      } else {
        rd.allow(c, {"montecarlo", "coverage_comparison"}, {"range", "azimuth", "elevation"});
        mc.coverage = true;
        if (c.contains("range")) mc.coverage_range = rd.positive(c["range"], {"montecarlo", "coverage_comparison", "range"});
        if (c.contains("azimuth"))
          mc.coverage_azimuth = deg_to_rad(rd.number(c["azimuth"], {"montecarlo", "coverage_comparison", "azimuth"}));
        if (c.contains("elevation"))
          mc.coverage_elevation = deg_to_rad(rd.number(c["elevation"], {"montecarlo", "coverage_comparison", "elevation"}));
      }
    }
  }

  if (root.contains("envelope")) {
    const auto& e = root["envelope"];
    rd.allow(e, {"envelope"}, {"level", "resolution", "points", "stride", "obj"});
    auto& ec = cfg.envelope;
    if (e.contains("level")) ec.level = rd.positive(e["level"], {"envelope", "level"});
    if (e.contains("resolution")) {
      const long long v = rd.integer(e["resolution"], {"envelope", "resolution"});
      if (v < 16) rd.fail({"envelope", "resolution"}, "must be at least 16");
      ec.resolution = static_cast<int>(v);
    }
    if (e.contains("points")) ec.points = rd.string(e["points"], {"envelope", "points"});
    if (e.contains("stride")) {
      const long long v = rd.integer(e["stride"], {"envelope", "stride"});
      if (v < 1) rd.fail({"envelope", "stride"}, "must be at least 1");
      ec.stride = static_cast<std::size_t>(v);
    }
    if (e.contains("obj")) ec.obj = rd.boolean(e["obj"], {"envelope", "obj"});
  }

  if (cfg.inputs.present() && (cfg.has_wall || cfg.has_pushbroom))
    rd.fail({"inputs"}, "give either a scenario block or an inputs block, not both");

  cfg.resolve();
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  RunConfig cfg = parse_config(read_text_file(path), path);
  cfg.path = path;
  cfg.base_dir = std::filesystem::path(path).parent_path();
  if (cfg.base_dir.empty()) cfg.base_dir = ".";
  return cfg;
}

inline RunConfig default_config() {
  RunConfig cfg;
  cfg.resolve();
  return cfg;
}

}  // namespace rae::io
