#pragma once

// End-to-end commands: scenario generation or file ingestion, submap
// compounding, envelopes, Monte-Carlo checks, and file emission. Work is
// spread over a thread pool; results land in index order and files are
// written by the calling thread only.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "rae/compounding.hpp"
#include "rae/covariance.hpp"
#include "rae/envelope.hpp"
#include "rae/errors.hpp"
#include "rae/frame.hpp"
#include "rae/io/config.hpp"
#include "rae/io/csv.hpp"
#include "rae/io/svg.hpp"
#include "rae/liegroup.hpp"
#include "rae/montecarlo.hpp"
#include "rae/numerics.hpp"
#include "rae/odometry.hpp"
#include "rae/parallel.hpp"
#include "rae/simulate.hpp"

namespace rae {

template <int N>
using MeasurementOf = std::conditional_t<N == 2, RbMeasurement, RaeMeasurement>;

inline Pose2 measurement_pose(const RbMeasurement& y) { return rb_to_pose2(y); }
inline Pose3 measurement_pose(const RaeMeasurement& y) { return rae_to_pose3(y); }

template <int N>
PoseCovariance<N> sensor_covariance(const SensorNoiseSpec& noise, SlotOrder order) {
  if constexpr (N == 2) {
    return sensor_covariance_2d(noise);
  } else {
    return sensor_covariance_3d(noise, order);
  }
}

template <int N>
struct SubmapPoint {
  std::size_t pose = 0;          // trajectory index of the measurement
  MeasurementOf<N> measurement;
  GaussianPose<N> compound;      // T_pzc and Gamma, central vehicle frame
  Covariance<N> position;        // C Gamma_rr C^T
};

// Index of the trajectory sample nearest in time; ties go to the earlier one.
template <int N>
std::size_t nearest_sample(std::span<const TrajectorySample<N>> traj, double t) {
  constexpr double tol = 1e-9;
  if (traj.empty() || t < traj.front().time - tol || t > traj.back().time + tol) {
    std::ostringstream os;
    os << "scan time " << t << " outside trajectory span";
    if (!traj.empty()) os << " [" << traj.front().time << ", " << traj.back().time << "]";
    throw TimestampOutOfRange(os.str());
  }
  const auto it = std::lower_bound(traj.begin(), traj.end(), t,
                                   [](const TrajectorySample<N>& s, double v) { return s.time < v; });
  if (it == traj.begin()) return 0;
  if (it == traj.end()) return traj.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - traj.begin());
  return (t - traj[hi - 1].time <= it->time - t) ? hi - 1 : hi;
}

// Trajectory sample nearest the mean position; ties go to the lower index.
template <int N>
std::size_t centroid_sample(std::span<const TrajectorySample<N>> traj) {
  VectorN<N> mean = VectorN<N>::Zero();
  for (const auto& s : traj) mean += s.pose.translation();
  mean /= static_cast<double>(traj.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double d = (traj[k].pose.translation() - mean).squaredNorm();
    if (d < best_d) best_d = d, best = k;
  }
  return best;
}

// 0-based central index from a selection; `fallback` is 1-based.
template <int N>
std::size_t central_index(std::span<const TrajectorySample<N>> traj, const io::CentralSelection& sel,
                          int fallback) {
  if (sel.centroid) return centroid_sample<N>(traj);
  const int one_based = sel.index > 0 ? sel.index : fallback;
  if (one_based == 0) return centroid_sample<N>(traj);
  if (one_based < 1 || static_cast<std::size_t>(one_based) > traj.size()) {
    std::ostringstream os;
    os << "central_pose " << one_based << " outside [1, " << traj.size() << "]";
    throw ValidationError(os.str());
  }
  return static_cast<std::size_t>(one_based - 1);
}

template <int N, typename Psd>
std::vector<SubmapPoint<N>> build_submap(std::span<const TrajectorySample<N>> traj,
                                         std::span<const MeasurementOf<N>> scans,
                                         std::span<const std::size_t> pose_of_scan,
                                         const ExtrinsicEstimate<N>& extrinsic, const SensorNoiseSpec& noise,
                                         SlotOrder order, const Psd& psd, std::size_t central,
                                         unsigned threads = 1) {
  if (scans.size() != pose_of_scan.size()) throw ValidationError("build_submap: one pose index per scan required");
  const auto relative = relative_uncertainty_all<N, Psd>(traj, psd, central);
  const PoseCovariance<N> sensor = sensor_covariance<N>(noise, order);
  const Pose<N> central_inv = traj[central].pose.inverse();
  std::vector<SubmapPoint<N>> out(scans.size());
  parallel_for(scans.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t k = pose_of_scan[i];
      const GaussianPose<N> rel{central_inv * traj[k].pose, relative[k]};
      SubmapPoint<N>& p = out[i];
      p.pose = k;
      p.measurement = scans[i];
      p.compound = full_compound<N>(rel, extrinsic, measurement_pose(scans[i]), sensor);
      p.position = project_position<N>(p.compound.covariance, p.compound.mean.rotation());
    }
  });
  return out;
}

template <int N>
std::vector<EnvelopeGeometry> submap_envelopes(std::span<const SubmapPoint<N>> points, const Pose<N>& frame,
                                               double level, int resolution, unsigned threads = 1) {
  std::vector<EnvelopeGeometry> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const GaussianPose<N> g{frame * points[i].compound.mean, points[i].compound.covariance};
      if constexpr (N == 2) {
        out[i] = envelope_2d(g, level, resolution);
      } else {
        out[i] = envelope_3d(g, level, resolution);
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// File emission

namespace io {

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> files;  // relative to the output directory
};

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }
  void write(const std::string& name, const std::string& content, CommandResult& result) const {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
    result.files.push_back(name);
  }
  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline Json noise_json(const SensorNoiseSpec& n, bool three_d, double sigma_alpha, double sigma_beta) {
  Json j;
  j["sigma_r"] = n.sigma_range;
  if (three_d) {
    j["sigma_azimuth"] = rad_to_deg(n.sigma_azimuth);
    j["sigma_elevation"] = rad_to_deg(n.sigma_elevation);
  } else {
    j["sigma_bearing"] = rad_to_deg(n.sigma_azimuth);
  }
  j["sigma_alpha"] = rad_to_deg(sigma_alpha);
  j["sigma_beta"] = sigma_beta;
  j["delta"] = n.delta;
  return j;
}

inline Json wall_json(const RunConfig& cfg) {
  const auto& w = cfg.wall;
  Json j = noise_json(w.noise, false, w.sigma_alpha, w.sigma_beta);
  j["psd_gyro"] = w.psd.gyro;
  j["psd_wheel"] = w.psd.wheel;
  j["wall"] = {{"wall_offset", w.wall_offset},
               {"x_start", w.x_start},
               {"x_end", w.x_end},
               {"speed", w.speed},
               {"spacing", w.spacing},
               {"mount_yaw", rad_to_deg(w.mount_yaw)},
               {"mount_offset", {w.mount_offset.x(), w.mount_offset.y()}},
               {"beam_bearing", rad_to_deg(w.beam_bearing)},
               {"measurement_noise", cfg.wall_noise}};
  return j;
}

inline Json pushbroom_json(const RunConfig& cfg) {
  const auto& p = cfg.pushbroom;
  Json j = noise_json(p.noise, true, p.sigma_alpha, p.sigma_beta);
  j["psd_omega_dot"] = p.psd.rotational;
  j["psd_nu_dot"] = p.psd.translational;
  const Eigen::Vector3d off = p.mount.translation();
  j["pushbroom"] = {{"speed", p.speed},
                    {"leg_length", p.leg_length},
                    {"legs", p.legs},
                    {"leg_spacing", p.leg_spacing},
                    {"profile_rate", p.profile_rate},
                    {"beam_width", rad_to_deg(p.beam_width)},
                    {"rays_per_profile", p.rays_per_profile},
                    {"max_range", p.max_range},
                    {"depth", p.surface.depth},
                    {"amplitude", p.surface.amplitude},
                    {"wavelength", p.surface.wavelength},
                    {"mount_offset", {off.x(), off.y(), off.z()}},
                    {"measurement_noise", cfg.pushbroom_noise}};
  return j;
}

inline Json common_json(const RunConfig& cfg, const std::string& command, std::size_t central) {
  Json j;
  j["command"] = command;
  j["central_pose"] = central + 1;
  j["slot_order"] = std::string(slot_order_name(cfg.slot_order));
  j["seed"] = cfg.seed;
  j["envelope"] = {{"level", cfg.envelope.level}, {"stride", cfg.envelope.stride}, {"obj", cfg.envelope.obj}};
  return j;
}

inline void merge(Json& into, const Json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

template <int N>
std::string submap_csv(std::span<const SubmapPoint<N>> points) {
  constexpr int D = kDof<N>;
  CsvWriter w(concat(concat(concat({"index", "pose", "t"}, pose_header(N)), triangle_header('g', D)),
                     triangle_header('s', N)));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    w.cell(static_cast<double>(i + 1)).cell(static_cast<double>(p.pose + 1)).cell(p.measurement.time);
    w.cells(pose_cells(p.compound.mean)).cells(upper_triangle(p.compound.covariance.matrix));
    w.cells(upper_triangle(p.position.matrix)).end_row();
  }
  return w.str();
}

inline Json vertices_json(const EnvelopeGeometry& g) {
  Json v = Json::array();
  for (const auto& p : g.vertices) {
    if (g.dimension == 2) {
      v.push_back({p.x(), p.y()});
    } else {
      v.push_back({p.x(), p.y(), p.z()});
    }
  }
  return v;
}

inline Json envelope_json(const EnvelopeGeometry& g) {
  Json e;
  e["vertices"] = vertices_json(g);
  if (g.dimension == 2) {
    e["banana_ratio"] = banana_ratio(g);
  } else {
    Json t = Json::array();
    for (const auto& tri : g.triangles) t.push_back({tri[0], tri[1], tri[2]});
    e["triangles"] = std::move(t);
  }
  return e;
}

inline Json envelope_header(int dimension, double level, const std::string& frame) {
  Json j;
  j["dimension"] = dimension;
  j["frame"] = frame;
  j["level"] = level;
  // Tangent ellipsoid of the position-relevant subspace, so dof = dimension.
  j["joint_coverage"] = chi_square_cdf(level * level, dimension);
  return j;
}

inline void require_scenario_only(const RunConfig& cfg, const char* command) {
  if (cfg.inputs.present())
    throw ValidationError(std::string(command) + ": inputs block given; use build-submap for recorded data");
}

inline CommandResult cmd_simulate_wall(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  require_scenario_only(cfg, "simulate-wall");
  WallScenarioSpec spec = cfg.wall;
  if (cfg.central.centroid) {
    // Resolved after the trajectory exists.
    spec.central_pose = 1;
  }
  spec.validate();
  const WallScenario sc = generate_wall_scenario(spec);
  const std::size_t central = cfg.central.centroid
                                  ? centroid_sample<2>(sc.trajectory)
                                  : central_index<2>(sc.trajectory, cfg.central, spec.central_pose);
  const auto& scans = cfg.wall_noise ? sc.noisy_measurements : sc.measurements;
  std::vector<std::size_t> pose_of(scans.size());
  for (std::size_t i = 0; i < pose_of.size(); ++i) pose_of[i] = i;
  const auto points = build_submap<2, Se2Psd>(sc.trajectory, scans, pose_of, sc.extrinsic, spec.noise,
                                              cfg.slot_order, spec.psd, central, cfg.threads);
  const int res = cfg.envelope.resolution.value_or(64);
  const auto env = submap_envelopes<2>(points, sc.trajectory[central].pose, cfg.envelope.level, res, cfg.threads);

  CommandResult result;
  const OutputDir out(out_dir);
  Json resolved = common_json(cfg, "simulate-wall", central);
  resolved["envelope"]["resolution"] = res;
  merge(resolved, wall_json(cfg));
  out.write("resolved_config.json", dump(resolved), result);
  out.write("trajectory.csv", trajectory_csv<2>(sc.trajectory), result);
  out.write("measurements.csv", scans_csv(scans), result);
  out.write("covariances.csv", submap_csv<2>(points), result);

  Json ej = envelope_header(2, cfg.envelope.level, "world");
  ej["central_pose"] = central + 1;
  ej["envelopes"] = Json::array();
  SvgDocument svg;
  std::vector<Eigen::Vector2d> track;
  for (const auto& s : sc.trajectory) track.push_back(s.pose.translation());
  svg.add({track, false, "#1f77b4", 1.5, "trajectory"});
  const double pad = 0.5;
  svg.add({{Eigen::Vector2d(spec.x_start - pad, spec.wall_offset), Eigen::Vector2d(spec.x_end + pad, spec.wall_offset)},
           false, "#7f7f7f", 2.0, "wall"});
  for (std::size_t i = 0; i < env.size(); ++i) {
    Json e = envelope_json(env[i]);
    e["pose"] = points[i].pose + 1;
    e["trace_gamma"] = points[i].compound.covariance.trace();
    ej["envelopes"].push_back(std::move(e));
    svg.add({loop_points(env[i]), true, points[i].pose == central ? "#d62728" : "#2ca02c", 1.0,
             "envelope_" + std::to_string(points[i].pose + 1)});
  }
  out.write("envelopes.json", ej.dump() + "\n", result);
  out.write("wall.svg", svg.str(), result);
  return result;
}

inline CommandResult write_submap_3d(const RunConfig& cfg, const OutputDir& out, CommandResult& result,
                                     std::span<const TrajectorySample<3>> traj,
                                     std::span<const SubmapPoint<3>> points, std::size_t central) {
  out.write("points.csv", submap_csv<3>(points), result);
  const int res = cfg.envelope.resolution.value_or(24);
  std::vector<SubmapPoint<3>> picked;
  for (std::size_t i = 0; i < points.size(); i += cfg.envelope.stride) picked.push_back(points[i]);
  const auto env = submap_envelopes<3>(picked, traj[central].pose, cfg.envelope.level, res, cfg.threads);
  Json ej = envelope_header(3, cfg.envelope.level, "world");
  ej["central_pose"] = central + 1;
  ej["envelopes"] = Json::array();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < env.size(); ++i) {
    Json e = envelope_json(env[i]);
    e["point"] = i * cfg.envelope.stride + 1;
    e["pose"] = picked[i].pose + 1;
    e["trace_gamma"] = picked[i].compound.covariance.trace();
    ej["envelopes"].push_back(std::move(e));
    names.push_back("point_" + std::to_string(i * cfg.envelope.stride + 1));
  }
  out.write("envelopes.json", ej.dump() + "\n", result);
  if (cfg.envelope.obj) out.write("envelopes.obj", obj_mesh(env, names), result);
  return result;
}

inline CommandResult cmd_simulate_pushbroom(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  require_scenario_only(cfg, "simulate-pushbroom");
  const PushBroomScenarioSpec& spec = cfg.pushbroom;
  const PushBroomScenario sc = generate_pushbroom_scenario(spec);
  const std::size_t central = central_index<3>(sc.trajectory, cfg.central, 0);
  const auto& pts = cfg.pushbroom_noise ? sc.noisy_points : sc.points;
  std::vector<RaeMeasurement> scans;
  std::vector<std::size_t> pose_of;
  for (const auto& p : pts) {
    scans.push_back(p.measurement);
    pose_of.push_back(p.profile);
  }
  const auto points = build_submap<3, WnoaPsd>(sc.trajectory, scans, pose_of, sc.extrinsic, spec.noise,
                                               cfg.slot_order, spec.psd, central, cfg.threads);
  CommandResult result;
  const OutputDir out(out_dir);
  Json resolved = common_json(cfg, "simulate-pushbroom", central);
  resolved["envelope"]["resolution"] = cfg.envelope.resolution.value_or(24);
  merge(resolved, pushbroom_json(cfg));
  resolved["dropped_rays"] = sc.dropped;
  out.write("resolved_config.json", dump(resolved), result);
  out.write("trajectory.csv", trajectory_csv<3>(sc.trajectory), result);
  out.write("scans.csv", scans_csv(scans), result);
  out.write("extrinsics.csv", extrinsic_csv<3>(sc.extrinsic), result);
  write_submap_3d(cfg, out, result, sc.trajectory, points, central);
  return result;
}

inline CommandResult cmd_build_submap(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (!cfg.inputs.present()) throw ValidationError("build-submap: config needs an inputs block");
  const CsvTable traj_t = read_csv(cfg.resolve_path(cfg.inputs.trajectory));
  const CsvTable scans_t = read_csv(cfg.resolve_path(cfg.inputs.scans));
  const CsvTable ext_t = read_csv(cfg.resolve_path(cfg.inputs.extrinsics));
  CommandResult result;
  const OutputDir out(out_dir);

  auto associate = [&](const auto& traj, const auto& scans) {
    constexpr int N = std::remove_cvref_t<decltype(traj[0].pose)>::kDim;
    std::vector<std::size_t> pose_of;
    for (std::size_t i = 0; i < scans.size(); ++i) {
      try {
        pose_of.push_back(nearest_sample<N>(traj, scans[i].time));
      } catch (const TimestampOutOfRange& e) {
        throw TimestampOutOfRange(scans_t.source + ": row " + std::to_string(scans_t.lines[i]) + ": " + e.what());
      }
    }
    return pose_of;
  };

  if (is_3d_trajectory(traj_t)) {
    const auto traj = trajectory_from_table<3>(traj_t);
    const auto scans = scans_3d_from_table(scans_t);
    const auto ext = extrinsic_from_table<3>(ext_t);
    const auto pose_of = associate(traj, scans);
    const std::size_t central = central_index<3>(traj, cfg.central, 0);
    const auto points = build_submap<3, WnoaPsd>(traj, scans, pose_of, ext, cfg.pushbroom.noise, cfg.slot_order,
                                                 cfg.pushbroom.psd, central, cfg.threads);
    Json resolved = common_json(cfg, "build-submap", central);
    merge(resolved, noise_json(cfg.pushbroom.noise, true, cfg.pushbroom.sigma_alpha, cfg.pushbroom.sigma_beta));
    resolved.erase("sigma_alpha");
    resolved.erase("sigma_beta");
    resolved["psd_omega_dot"] = cfg.pushbroom.psd.rotational;
    resolved["psd_nu_dot"] = cfg.pushbroom.psd.translational;
    resolved["inputs"] = {{"trajectory", cfg.inputs.trajectory}, {"scans", cfg.inputs.scans},
                          {"extrinsics", cfg.inputs.extrinsics}};
    resolved["envelope"]["resolution"] = cfg.envelope.resolution.value_or(24);
    out.write("resolved_config.json", dump(resolved), result);
    write_submap_3d(cfg, out, result, traj, points, central);
  } else {
    const auto traj = trajectory_from_table<2>(traj_t);
    const auto scans = scans_2d_from_table(scans_t);
    const auto ext = extrinsic_from_table<2>(ext_t);
    const auto pose_of = associate(traj, scans);
    const std::size_t central = central_index<2>(traj, cfg.central, 0);
    const auto points = build_submap<2, Se2Psd>(traj, scans, pose_of, ext, cfg.wall.noise, cfg.slot_order,
                                                cfg.wall.psd, central, cfg.threads);
    Json resolved = common_json(cfg, "build-submap", central);
    merge(resolved, noise_json(cfg.wall.noise, false, cfg.wall.sigma_alpha, cfg.wall.sigma_beta));
    resolved.erase("sigma_alpha");
    resolved.erase("sigma_beta");
    resolved["psd_gyro"] = cfg.wall.psd.gyro;
    resolved["psd_wheel"] = cfg.wall.psd.wheel;
    resolved["inputs"] = {{"trajectory", cfg.inputs.trajectory}, {"scans", cfg.inputs.scans},
                          {"extrinsics", cfg.inputs.extrinsics}};
    out.write("resolved_config.json", dump(resolved), result);
    out.write("points.csv", submap_csv<2>(points), result);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Monte-Carlo

inline Json report_json(const ConsistencyReport& r) {
  Json j;
  j["samples"] = r.samples;
  j["dof"] = r.dof;
  j["anees"] = r.anees;
  j["anees_ci95"] = {r.anees_lower, r.anees_upper};
  j["coverage"] = r.coverage;
  j["expected_coverage"] = r.expected_coverage;
  j["threshold"] = r.threshold;
  if (std::isfinite(r.frobenius_error)) j["frobenius_error"] = r.frobenius_error;
  return j;
}

inline CompoundInputs<2> wall_compound_inputs(const RunConfig& cfg, std::size_t& central, std::size_t& target) {
  const WallScenario sc = generate_wall_scenario(cfg.wall);
  central = central_index<2>(sc.trajectory, cfg.central, cfg.wall.central_pose);
  const int offset = cfg.montecarlo.offset.value_or(4);
  const long long t = std::clamp<long long>(static_cast<long long>(central) + offset, 0,
                                            static_cast<long long>(sc.trajectory.size()) - 1);
  target = static_cast<std::size_t>(t);
  CompoundInputs<2> in;
  in.relative = relative_pose<2, Se2Psd>(sc.trajectory, cfg.wall.psd, central, target);
  in.extrinsic = sc.extrinsic;
  in.measurement = rb_to_pose2(sc.measurements[target]);
  in.sensor = sensor_covariance_2d(cfg.wall.noise);
  return in;
}

inline CompoundInputs<3> pushbroom_compound_inputs(const RunConfig& cfg, std::size_t& central, std::size_t& target) {
  const PushBroomScenario sc = generate_pushbroom_scenario(cfg.pushbroom);
  central = central_index<3>(sc.trajectory, cfg.central, 0);
  const int offset = cfg.montecarlo.offset.value_or(20);
  const long long t = std::clamp<long long>(static_cast<long long>(central) + offset, 0,
                                            static_cast<long long>(sc.trajectory.size()) - 1);
  target = static_cast<std::size_t>(t);
  const int ray = cfg.montecarlo.ray.value_or(cfg.pushbroom.rays_per_profile / 2);
  const ScanPoint* hit = nullptr;
  for (const auto& p : sc.points)
    if (p.profile == target && p.ray == ray) hit = &p;
  if (!hit) throw ValidationError("montecarlo: selected pushbroom ray has no return");
  CompoundInputs<3> in;
  in.relative = relative_pose<3, WnoaPsd>(sc.trajectory, cfg.pushbroom.psd, central, target);
  in.extrinsic = sc.extrinsic;
  in.measurement = rae_to_pose3(hit->measurement);
  in.sensor = sensor_covariance_3d(cfg.pushbroom.noise, cfg.slot_order);
  return in;
}

struct MonteCarloOutcome {
  ConsistencyReport compound;
  std::optional<CoverageComparison> coverage;
  std::size_t central = 0, target = 0;
  bool passed = false;
};

inline MonteCarloOutcome run_montecarlo(const RunConfig& cfg) {
  const auto& mc = cfg.montecarlo;
  const std::uint64_t seed = mc.seed.value_or(cfg.seed);
  MonteCarloOutcome o;
  auto check = [&](const auto& in) {
    const auto samples = sample_compound(in, mc.samples, seed, cfg.threads);
    auto analytic = in.analytic();
    analytic.covariance.matrix *= mc.covariance_scale;
    using P = std::remove_cvref_t<decltype(samples[0])>;
    o.compound = consistency_report<P::kDim>(std::span<const P>(samples), analytic);
  };
  if (mc.scenario == "pushbroom") {
    check(pushbroom_compound_inputs(cfg, o.central, o.target));
  } else {
    check(wall_compound_inputs(cfg, o.central, o.target));
  }
  if (mc.coverage) {
    CoverageConfig cc;
    cc.measurement = {mc.coverage_range, mc.coverage_azimuth, mc.coverage_elevation, 0.0};
    cc.noise = cfg.pushbroom.noise;
    cc.slot_order = cfg.slot_order;
    o.coverage = coverage_comparison(cc, mc.samples, seed + 1, cfg.threads);
  }
  o.passed = o.compound.anees_within(mc.anees_lower, mc.anees_upper);
  return o;
}

inline CommandResult cmd_montecarlo(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  require_scenario_only(cfg, "montecarlo");
  const MonteCarloOutcome o = run_montecarlo(cfg);
  CommandResult result;
  const OutputDir out(out_dir);
  const auto& mc = cfg.montecarlo;
  Json resolved = common_json(cfg, "montecarlo", o.central);
  merge(resolved, mc.scenario == "pushbroom" ? pushbroom_json(cfg) : wall_json(cfg));
  resolved["montecarlo"] = {{"scenario", mc.scenario},
                            {"samples", mc.samples},
                            {"seed", mc.seed.value_or(cfg.seed)},
                            {"covariance_scale", mc.covariance_scale},
                            {"target_pose", o.target + 1},
                            {"anees_band", {mc.anees_lower, mc.anees_upper}},
                            {"coverage_comparison", mc.coverage}};
  if (mc.scenario == "pushbroom")
    resolved["montecarlo"]["ray"] = mc.ray.value_or(cfg.pushbroom.rays_per_profile / 2);
  if (mc.coverage) {
    resolved["montecarlo"]["coverage_measurement"] = {{"range", mc.coverage_range},
                                                      {"azimuth", rad_to_deg(mc.coverage_azimuth)},
                                                      {"elevation", rad_to_deg(mc.coverage_elevation)}};
  }
  out.write("resolved_config.json", dump(resolved), result);

  Json rep;
  rep["compound"] = report_json(o.compound);
  rep["compound"]["anees_band"] = {mc.anees_lower, mc.anees_upper};
  rep["compound"]["passed"] = o.passed;
  if (o.coverage) {
    rep["coverage"] = {{"group", report_json(o.coverage->group)},
                       {"projected", report_json(o.coverage->projected)},
                       {"linearized", report_json(o.coverage->linearized)}};
  }
  out.write("montecarlo_report.json", dump(rep), result);
  result.exit_code = o.passed ? 0 : 3;
  return result;
}

// ---------------------------------------------------------------------------
// Envelopes for a points file (same layout as covariances.csv / points.csv).

template <int N>
std::vector<GaussianPose<N>> gaussian_poses_from_table(const CsvTable& t) {
  std::vector<GaussianPose<N>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    GaussianPose<N> g;
    try {
      if constexpr (N == 2) {
        g.mean = Pose2(Rotation2::from_angle(row[t.column("theta")]), Eigen::Vector2d(row[t.column("x")], row[t.column("y")]));
      } else {
        g.mean = Pose3(quaternion_to_rotation(row[t.column("qw")], row[t.column("qx")], row[t.column("qy")], row[t.column("qz")]),
                       Eigen::Vector3d(row[t.column("x")], row[t.column("y")], row[t.column("z")]));
      }
    } catch (const ValidationError& e) {
      throw ParseError(t.source + ": row " + std::to_string(t.lines[r]) + ": " + e.what(), t.lines[r]);
    }
    g.covariance = {read_triangle<kDof<N>>(t, r, 'g'), Datum::point, Frame::measurement};
    if (!is_psd(g.covariance.matrix, 1e-9)) {
      throw ParseError(t.source + ": row " + std::to_string(t.lines[r]) + ": covariance is not PSD", t.lines[r]);
    }
    out.push_back(g);
  }
  return out;
}

inline CommandResult cmd_envelope(const RunConfig& cfg, const std::string& points_path,
                                  const std::filesystem::path& out_dir) {
  const std::string path = points_path.empty() ? cfg.resolve_path(cfg.envelope.points) : points_path;
  if (path.empty()) throw ValidationError("envelope: no points file given");
  const CsvTable t = read_csv(path);
  CommandResult result;
  const OutputDir out(out_dir);
  const bool three_d = t.has("qw");
  const int res = cfg.envelope.resolution.value_or(three_d ? 24 : 64);
  std::vector<EnvelopeGeometry> env;
  if (three_d) {
    const auto g = gaussian_poses_from_table<3>(t);
    env.resize(g.size());
    parallel_for(g.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) env[i] = envelope_3d(g[i], cfg.envelope.level, res);
    });
  } else {
    const auto g = gaussian_poses_from_table<2>(t);
    env.resize(g.size());
    parallel_for(g.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) env[i] = envelope_2d(g[i], cfg.envelope.level, res);
    });
  }
  Json resolved;
  resolved["command"] = "envelope";
  resolved["points"] = path;
  resolved["envelope"] = {{"level", cfg.envelope.level}, {"resolution", res}, {"obj", cfg.envelope.obj}};
  out.write("resolved_config.json", dump(resolved), result);

  Json ej = envelope_header(three_d ? 3 : 2, cfg.envelope.level, "input");
  ej["envelopes"] = Json::array();
  std::vector<std::string> names;
  SvgDocument svg;
  for (std::size_t i = 0; i < env.size(); ++i) {
    Json e = envelope_json(env[i]);
    e["row"] = i + 1;
    ej["envelopes"].push_back(std::move(e));
    names.push_back("point_" + std::to_string(i + 1));
    if (!three_d) svg.add({loop_points(env[i]), true, "#2ca02c", 1.0, names.back()});
  }
  out.write("envelopes.json", ej.dump() + "\n", result);
  if (three_d) {
    if (cfg.envelope.obj) out.write("envelopes.obj", obj_mesh(env, names), result);
  } else {
    out.write("envelopes.svg", svg.str(), result);
  }
  return result;
}

}  // namespace io
}  // namespace rae
