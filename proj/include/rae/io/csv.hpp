#pragma once

// Numeric CSV tables and the trajectory / scan / extrinsic / covariance
// layouts used on disk.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "rae/compounding.hpp"
#include "rae/covariance.hpp"
#include "rae/errors.hpp"
#include "rae/frame.hpp"
#include "rae/io/format.hpp"
#include "rae/liegroup.hpp"
#include "rae/odometry.hpp"

namespace rae::io {

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;  // 1-based file line of each row

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
  bool has(std::string_view name) const { return find(name).has_value(); }
  std::size_t column(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw ParseError(source + ": missing column '" + std::string(name) + "'", 1);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable t;
  t.source = source;
  std::size_t line_no = 0, pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (detail::trim(line).empty() || detail::trim(line).front() == '#') continue;
    const auto fields = detail::split(line);
    if (!have_header) {
      for (auto f : fields) t.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      std::ostringstream os;
      os << source << ": row " << line_no << " has " << fields.size() << " fields, expected "
         << t.header.size();
      throw ParseError(os.str(), line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      const auto f = fields[c];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        std::ostringstream os;
        os << source << ": row " << line_no << ", column '" << t.header[c] << "': cannot parse '" << f
           << "' as a number";
        throw ParseError(os.str(), line_no);
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(line_no);
  }
  if (!have_header) throw ParseError(source + ": empty file", 1);
  return t;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path), path); }

// ---------------------------------------------------------------------------
// Layout helpers

inline Rotation3 quaternion_to_rotation(double w, double x, double y, double z) {
  const Eigen::Quaterniond q(w, x, y, z);
  if (!(q.norm() > 0.0)) throw ValidationError("zero quaternion");
  return Rotation3(q.normalized().toRotationMatrix());
}

// Scalar-first, w >= 0.
inline Eigen::Vector4d rotation_to_quaternion(const Rotation3& c) {
  Eigen::Quaterniond q(c.matrix());
  q.normalize();
  Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
  if (v(0) < 0.0 || (v(0) == 0.0 && (v(1) < 0.0 || (v(1) == 0.0 && (v(2) < 0.0 || (v(2) == 0.0 && v(3) < 0.0))))))
    v = -v;
  return v;
}

inline std::vector<std::string> triangle_header(char prefix, int dim) {
  std::vector<std::string> out;
  for (int i = 1; i <= dim; ++i)
    for (int j = i; j <= dim; ++j) out.push_back(std::string(1, prefix) + std::to_string(i) + std::to_string(j));
  return out;
}

template <int D>
Eigen::Matrix<double, D, D> read_triangle(const CsvTable& t, std::size_t row, char prefix) {
  Eigen::Matrix<double, (D * (D + 1)) / 2, 1> v;
  const auto names = triangle_header(prefix, D);
  for (std::size_t i = 0; i < names.size(); ++i) v(static_cast<int>(i)) = t.rows[row][t.column(names[i])];
  return from_upper_triangle<D>(v);
}

inline bool is_3d_trajectory(const CsvTable& t) { return t.has("qw"); }

template <int N>
std::vector<TrajectorySample<N>> trajectory_from_table(const CsvTable& t) {
  std::vector<TrajectorySample<N>> out;
  const std::size_t ct = t.column("t"), cx = t.column("x"), cy = t.column("y");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    TrajectorySample<N> s;
    s.time = row[ct];
    if constexpr (N == 2) {
      s.pose = Pose2(Rotation2::from_angle(row[t.column("theta")]), Eigen::Vector2d(row[cx], row[cy]));
    } else {
      try {
        s.pose = Pose3(quaternion_to_rotation(row[t.column("qw")], row[t.column("qx")], row[t.column("qy")],
                                              row[t.column("qz")]),
                       Eigen::Vector3d(row[cx], row[cy], row[t.column("z")]));
      } catch (const ValidationError& e) {
        throw ParseError(t.source + ": row " + std::to_string(t.lines[r]) + ": " + e.what(), t.lines[r]);
      }
    }
    if (!out.empty() && !(s.time > out.back().time)) {
      throw ParseError(t.source + ": row " + std::to_string(t.lines[r]) + ": timestamps must increase",
                       t.lines[r]);
    }
    out.push_back(s);
  }
  if (out.empty()) throw ParseError(t.source + ": no trajectory samples", 1);
  return out;
}

inline std::vector<RbMeasurement> scans_2d_from_table(const CsvTable& t) {
  std::vector<RbMeasurement> out;
  const std::size_t ct = t.column("t"), cr = t.column("range"), cb = t.column("bearing");
  for (const auto& row : t.rows) out.push_back({row[cr], row[cb], row[ct]});
  return out;
}

inline std::vector<RaeMeasurement> scans_3d_from_table(const CsvTable& t) {
  std::vector<RaeMeasurement> out;
  const std::size_t ct = t.column("t"), cr = t.column("range"), ca = t.column("azimuth"),
                    ce = t.column("elevation");
  for (const auto& row : t.rows) out.push_back({row[cr], row[ca], row[ce], row[ct]});
  return out;
}

// One row: pose of the sensor in the vehicle frame plus its covariance.
template <int N>
ExtrinsicEstimate<N> extrinsic_from_table(const CsvTable& t) {
  if (t.rows.size() != 1) throw ParseError(t.source + ": expected exactly one extrinsic row", 2);
  const auto& row = t.rows[0];
  ExtrinsicEstimate<N> e;
  if constexpr (N == 2) {
    e.pose = Pose2(Rotation2::from_angle(row[t.column("theta")]), Eigen::Vector2d(row[t.column("x")], row[t.column("y")]));
  } else {
    e.pose = Pose3(quaternion_to_rotation(row[t.column("qw")], row[t.column("qx")], row[t.column("qy")], row[t.column("qz")]),
                   Eigen::Vector3d(row[t.column("x")], row[t.column("y")], row[t.column("z")]));
  }
  e.covariance = {read_triangle<kDof<N>>(t, 0, 'g'), Datum::sensor, Frame::sensor};
  if (!is_psd(e.covariance.matrix, 1e-12)) {
    throw ParseError(t.source + ": row " + std::to_string(t.lines[0]) + ": covariance is not PSD", t.lines[0]);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Writers. Rows are assembled in memory and written once.

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  CsvWriter& cell(double v) {
    out_ << (first_ ? "" : ",") << format_double(v);
    first_ = false;
    return *this;
  }
  template <typename Derived>
  CsvWriter& cells(const Eigen::MatrixBase<Derived>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) cell(v(i));
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::vector<std::string> pose_header(int n) {
  if (n == 2) return {"x", "y", "theta"};
  return {"x", "y", "z", "qw", "qx", "qy", "qz"};
}

inline Eigen::VectorXd pose_cells(const Pose2& p) {
  return Eigen::Vector3d(p.translation().x(), p.translation().y(), p.rotation().angle());
}

inline Eigen::VectorXd pose_cells(const Pose3& p) {
  Eigen::VectorXd v(7);
  v.head<3>() = p.translation();
  v.tail<4>() = rotation_to_quaternion(p.rotation());
  return v;
}

template <int N>
std::string trajectory_csv(const std::vector<TrajectorySample<N>>& traj) {
  CsvWriter w(concat({"t"}, pose_header(N)));
  for (const auto& s : traj) w.cell(s.time).cells(pose_cells(s.pose)).end_row();
  return w.str();
}

inline std::string scans_csv(const std::vector<RbMeasurement>& m) {
  CsvWriter w({"t", "range", "bearing"});
  for (const auto& y : m) w.cell(y.time).cell(y.range).cell(y.bearing).end_row();
  return w.str();
}

inline std::string scans_csv(const std::vector<RaeMeasurement>& m) {
  CsvWriter w({"t", "range", "azimuth", "elevation"});
  for (const auto& y : m) w.cell(y.time).cell(y.range).cell(y.azimuth).cell(y.elevation).end_row();
  return w.str();
}

template <int N>
std::string extrinsic_csv(const ExtrinsicEstimate<N>& e) {
  CsvWriter w(concat(pose_header(N), triangle_header('g', kDof<N>)));
  w.cells(pose_cells(e.pose)).cells(upper_triangle(e.covariance.matrix)).end_row();
  return w.str();
}

}  // namespace rae::io
