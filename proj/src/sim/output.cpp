#include "screwdyn/sim/output.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace screwdyn::sim {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string json_string(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    switch (c) {
      case '"': q += "\\\""; break;
      case '\\': q += "\\\\"; break;
      case '\n': q += "\\n"; break;
      case '\r': q += "\\r"; break;
      case '\t': q += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          q += buf;
        } else {
          q += c;
        }
    }
  }
  return q + "\"";
}

std::array<double, 15> row_values(const BodyRecord& b) {
  return {b.quat(0), b.quat(1), b.quat(2), b.quat(3), b.d.x(), b.d.y(), b.d.z(), b.v.x(),
          b.v.y(),   b.v.z(),   b.w.x(),   b.w.y(),   b.w.z(), b.e_kin, b.e_pot};
}

constexpr const char* kValueKeys[15] = {"qw", "qx", "qy", "qz", "dx", "dy", "dz", "vx",
                                        "vy", "vz", "wx", "wy", "wz", "e_kin", "e_pot"};

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Error: return "error";
  }
  return "error";
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory(std::ostream& out, const SimulationResult& res, OutputFormat format) {
  if (format == OutputFormat::Csv) out << kCsvHeader << "\n";
  for (const TrajectoryRecord& rec : res.records) {
    for (const BodyRecord& b : rec.bodies) {
      const auto vals = row_values(b);
      if (format == OutputFormat::Csv) {
        out << format_number(rec.t) << ',' << csv_field(b.label);
        for (double v : vals) out << ',' << format_number(v);
      } else {
        out << "{\"t\":" << format_number(rec.t) << ",\"body\":" << json_string(b.label);
        for (int i = 0; i < 15; ++i) out << ",\"" << kValueKeys[i] << "\":" << format_number(vals[i]);
        out << '}';
      }
      out << "\n";
    }
  }
}

std::string format_summary(const SimulationResult& res) {
  std::ostringstream os;
  os << "status=" << status_name(res.status) << "\n";
  os << "steps=" << res.steps << "\n";
  os << "t_end=" << format_number(res.t_end) << "\n";
  os << "energy_initial=" << format_number(res.energy_initial) << "\n";
  os << "energy_final=" << format_number(res.energy_final) << "\n";
  os << "energy_drift=" << format_number(res.energy_drift) << "\n";
  os << "max_constraint_residual=" << format_number(res.max_constraint_residual) << "\n";
  os << "max_quat_norm_error=" << format_number(res.max_quat_norm_error) << "\n";
  if (res.status != RunStatus::Ok) {
    os << "last_finite_time=" << format_number(res.last_finite_time) << "\n";
    os << "message=" << res.message << "\n";
  }
  return os.str();
}

}  // namespace screwdyn::sim
