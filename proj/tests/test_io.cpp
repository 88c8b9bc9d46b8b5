#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rae/errors.hpp"
#include "rae/io/config.hpp"
#include "rae/io/csv.hpp"
#include "rae/io/format.hpp"
#include "rae/io/svg.hpp"
#include "rae/pipeline.hpp"
#include "test_util.hpp"

using namespace rae;
using namespace rae::io;
using rae::test::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.5), "-2.5");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-30, 30));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Format, FixedTrimsZeros) {
  EXPECT_EQ(format_fixed(1.5), "1.5");
  EXPECT_EQ(format_fixed(2.0), "2");
  EXPECT_EQ(format_fixed(-1e-9), "0");
  EXPECT_EQ(format_fixed(1.234567, 3), "1.235");
}

TEST(Csv, ParsesHeaderCommentsAndBlankLines) {
  const CsvTable t = parse_csv("# comment\nt, x ,y\n\n0,1,2\n1,3,4\n", "mem");
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.column("x"), 1u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][2], 4.0);
  EXPECT_EQ(t.lines[0], 4u);
  EXPECT_EQ(t.lines[1], 5u);
}

TEST(Csv, BadNumberReportsRow) {
  try {
    parse_csv("t,x\n0,1\n1,abc\n", "f.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
}

TEST(Csv, FieldCountAndEmptyFile) {
  try {
    parse_csv("a,b\n1,2\n3\n", "f.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
  EXPECT_THROW(parse_csv("", "f.csv"), ParseError);
  EXPECT_THROW(parse_csv("a,b\n1,\n", "f.csv"), ParseError);
}

TEST(Csv, MissingColumnThrows) {
  const CsvTable t = parse_csv("t,x\n0,1\n", "f.csv");
  EXPECT_FALSE(t.has("y"));
  EXPECT_THROW(t.column("y"), ParseError);
}

TEST(Csv, TimestampsMustIncrease) {
  const CsvTable t = parse_csv("t,x,y,theta\n0,0,0,0\n1,1,0,0\n1,2,0,0\n", "traj.csv");
  try {
    trajectory_from_table<2>(t);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 4u);
  }
}

TEST(Csv, ZeroQuaternionReportsRow) {
  const CsvTable t = parse_csv("t,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n1,0,0,0,0,0,0,0\n", "traj.csv");
  try {
    trajectory_from_table<3>(t);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
}

TEST(Quaternion, RoundTrip) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Rotation3 c = rng.pose3().rotation();
    const Eigen::Vector4d q = rotation_to_quaternion(c);
    EXPECT_GE(q(0), 0.0);
    EXPECT_NEAR(q.norm(), 1.0, 1e-15);
    EXPECT_LT((quaternion_to_rotation(q(0), q(1), q(2), q(3)).matrix() - c.matrix()).norm(), 1e-14);
  }
  // Unnormalised input is accepted.
  EXPECT_TRUE(quaternion_to_rotation(2, 0, 0, 0).matrix().isIdentity(1e-15));
  EXPECT_THROW(quaternion_to_rotation(0, 0, 0, 0), ValidationError);
}

TEST(Csv, Trajectory2dRoundTripIsExact) {
  Rng rng(3);
  std::vector<TrajectorySample<2>> traj;
  for (int i = 0; i < 50; ++i) traj.push_back({0.1 * i + rng.uniform(0, 0.01), rng.pose2(), std::nullopt});
  const auto back = trajectory_from_table<2>(parse_csv(trajectory_csv<2>(traj), "mem"));
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back[i].time, traj[i].time);
    EXPECT_EQ(back[i].pose.translation(), traj[i].pose.translation());
    EXPECT_NEAR(back[i].pose.rotation().angle(), traj[i].pose.rotation().angle(), 1e-15);
  }
}

TEST(Csv, Trajectory3dRoundTrip) {
  Rng rng(4);
  std::vector<TrajectorySample<3>> traj;
  for (int i = 0; i < 50; ++i) traj.push_back({0.1 * i, rng.pose3(), std::nullopt});
  const CsvTable t = parse_csv(trajectory_csv<3>(traj), "mem");
  EXPECT_TRUE(is_3d_trajectory(t));
  const auto back = trajectory_from_table<3>(t);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back[i].pose.translation(), traj[i].pose.translation());
    EXPECT_LT((back[i].pose.rotation().matrix() - traj[i].pose.rotation().matrix()).norm(), 1e-14);
  }
}

TEST(Csv, ScansRoundTrip) {
  const std::vector<RbMeasurement> rb{{2.0, 0.1, 0.5}, {3.25, -1.0, 1.0}};
  const auto rb_back = scans_2d_from_table(parse_csv(scans_csv(rb), "mem"));
  ASSERT_EQ(rb_back.size(), 2u);
  EXPECT_EQ(rb_back[1].range, 3.25);
  EXPECT_EQ(rb_back[1].bearing, -1.0);
  EXPECT_EQ(rb_back[1].time, 1.0);
  const std::vector<RaeMeasurement> rae{{5.0, 0.2, -0.3, 0.1}};
  const auto rae_back = scans_3d_from_table(parse_csv(scans_csv(rae), "mem"));
  EXPECT_EQ(rae_back[0].azimuth, 0.2);
  EXPECT_EQ(rae_back[0].elevation, -0.3);
}

TEST(Csv, ExtrinsicRoundTripAndPsdCheck) {
  Rng rng(5);
  ExtrinsicEstimate<3> e;
  e.pose = rng.pose3();
  Matrix6d a = Matrix6d::Random();
  e.covariance = {a * a.transpose() * 1e-3, Datum::sensor, Frame::sensor};
  const auto back = extrinsic_from_table<3>(parse_csv(extrinsic_csv<3>(e), "ext.csv"));
  EXPECT_EQ(back.covariance.matrix, e.covariance.matrix);
  EXPECT_EQ(back.pose.translation(), e.pose.translation());

  ExtrinsicEstimate<2> bad;
  bad.covariance = {-Eigen::Matrix3d::Identity(), Datum::sensor, Frame::sensor};
  EXPECT_THROW(extrinsic_from_table<2>(parse_csv(extrinsic_csv<2>(bad), "ext.csv")), ParseError);
  EXPECT_THROW(extrinsic_from_table<2>(parse_csv("x,y,theta\n", "ext.csv")), ParseError);
}

TEST(Csv, EmittedSubmapCovariancesReparsePsd) {
  WallScenarioSpec spec;
  spec.noise = {1e-2, deg_to_rad(5.0), 0.0, 1e-5};
  spec.sigma_alpha = deg_to_rad(1.0);
  spec.sigma_beta = 5e-3;
  spec.psd = {1e-4, 1e-4};
  const WallScenario sc = generate_wall_scenario(spec);
  std::vector<std::size_t> pose_of(sc.measurements.size());
  for (std::size_t i = 0; i < pose_of.size(); ++i) pose_of[i] = i;
  const auto points = build_submap<2, Se2Psd>(sc.trajectory, sc.measurements, pose_of, sc.extrinsic, spec.noise,
                                              SlotOrder::perpendicular_axes, spec.psd, 10);
  const CsvTable t = parse_csv(submap_csv<2>(points), "cov.csv");
  ASSERT_EQ(t.rows.size(), points.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const Eigen::Matrix3d g = read_triangle<3>(t, r, 'g');
    EXPECT_TRUE(is_psd(g, 0.0));
    EXPECT_EQ(g, points[r].compound.covariance.matrix);
    EXPECT_TRUE(is_psd(read_triangle<2>(t, r, 's'), 0.0));
  }
  EXPECT_EQ(gaussian_poses_from_table<2>(t).size(), points.size());
}

TEST(Config, DefaultsAndUnits) {
  const RunConfig cfg = parse_config(R"({"sigma_bearing": 2, "seed": 9, "central_pose": 4})");
  EXPECT_NEAR(cfg.wall.noise.sigma_azimuth, 2 * kPi / 180, 1e-16);
  EXPECT_EQ(cfg.wall.seed, 9u);
  EXPECT_EQ(cfg.central.index, 4);
  EXPECT_EQ(cfg.slot_order, SlotOrder::perpendicular_axes);
  EXPECT_EQ(parse_config(R"({"central_pose": "centroid"})").central.centroid, true);
}

TEST(Config, UnknownKeyReportsPathAndLine) {
  const std::string msg = error_of([] { parse_config("{\n  \"wall\": {\n    \"wal_offset\": 3\n  }\n}", "c.json"); });
  EXPECT_NE(msg.find("c.json:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("wall.wal_offset"), std::string::npos) << msg;
  EXPECT_THROW(parse_config(R"({"sigmar": 1})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"montecarlo": {"coverage": true}})"), ValidationError);
}

TEST(Config, InvalidJsonReportsLineAndColumn) {
  try {
    parse_config("{\n  \"seed\": 1,\n  oops\n}", "c.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("c.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Config, ValueErrors) {
  EXPECT_THROW(parse_config(R"({"sigma_r": -1})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"central_pose": 0})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"slot_order": "diagonal"})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"threads": 0})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"montecarlo": {"samples": 999}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"montecarlo": {"anees_band": [1.1, 0.9]}})"), ValidationError);
  // delta above a tenth of the smallest angular sigma
  EXPECT_THROW(parse_config(R"({"delta": 0.1})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"wall": {}, "inputs": {"trajectory": "a", "scans": "b", "extrinsics": "c"}})"),
               ValidationError);
  EXPECT_EQ(parse_config(R"({"slot_order": "paper-literal"})").slot_order, SlotOrder::paper_literal);
  EXPECT_EQ(slot_order_name(parse_slot_order("perp-axes")), "perp-axes");
}

TEST(Config, CoverageComparisonForms) {
  EXPECT_TRUE(parse_config(R"({"montecarlo": {"coverage_comparison": true}})").montecarlo.coverage);
  const auto mc = parse_config(R"({"montecarlo": {"coverage_comparison": {"range": 4, "azimuth": 10}}})").montecarlo;
  EXPECT_TRUE(mc.coverage);
  EXPECT_EQ(mc.coverage_range, 4.0);
  EXPECT_NEAR(mc.coverage_azimuth, kPi / 18, 1e-16);
}

TEST(Svg, ViewBoxAndUnfilledPaths) {
  SvgDocument doc;
  doc.add({{Eigen::Vector2d(0, 0), Eigen::Vector2d(10, 2)}, false, "#000000", 1.0, "line"});
  doc.add({{Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 1), Eigen::Vector2d(2, 2)}, true, "#ff0000", 1.0, "tri"});
  const std::string s = doc.str();
  EXPECT_NE(s.find("viewBox=\"-1 -2.5 12 3\""), std::string::npos) << s;
  EXPECT_NE(s.find("id=\"tri\""), std::string::npos);
  EXPECT_NE(s.find(" Z\""), std::string::npos);
  std::size_t paths = 0, unfilled = 0;
  for (std::size_t p = s.find("<path"); p != std::string::npos; p = s.find("<path", p + 1)) ++paths;
  for (std::size_t p = s.find("fill=\"none\""); p != std::string::npos; p = s.find("fill=\"none\"", p + 1)) ++unfilled;
  EXPECT_EQ(paths, 2u);
  EXPECT_EQ(unfilled, 2u);
}

TEST(Obj, OneBasedIndicesAcrossObjects) {
  GaussianPose<3> g{Pose3(), {Matrix6d::Identity() * 1e-4, Datum::point, Frame::measurement}};
  const auto e = envelope_3d(g, 3.0, 16);
  const std::string obj = obj_mesh({e, e}, {"a", "b"});
  EXPECT_EQ(obj.rfind("o a\n", 0), 0u);
  EXPECT_NE(obj.find("\no b\n"), std::string::npos);
  std::size_t vcount = 0, max_index = 0, min_index = std::numeric_limits<std::size_t>::max();
  std::istringstream in(obj);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++vcount;
    if (line.rfind("f ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      std::size_t a;
      while (ls >> a) max_index = std::max(max_index, a), min_index = std::min(min_index, a);
    }
  }
  EXPECT_EQ(vcount, 2 * e.vertices.size());
  EXPECT_EQ(min_index, 1u);
  EXPECT_EQ(max_index, vcount);
}
