#include "screwdyn/sim/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "screwdyn/rotation.hpp"

namespace screwdyn::sim {

namespace fs = std::filesystem;

namespace {

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

CommandResult failure(const std::string& msg) { return {1, "", "error: " + msg + "\n"}; }

std::string join_numbers(const std::vector<double>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + format_number(v[i]);
  return s;
}

int thread_budget(int requested) {
  if (requested > 0) return requested;
  const char* env = std::getenv("SCREWDYN_THREADS");
  if (!env) return 1;
  const auto v = parse_double(env);
  if (!v || *v < 1.0 || *v != std::floor(*v)) return 1;
  return static_cast<int>(std::min(*v, 256.0));
}

struct RunOutcome {
  int exit_code = 0;
  std::string out;
  std::string err;
};

RunOutcome run_one(const std::string& config, const fs::path& traj_path, OutputFormat format) {
  RunOutcome o;
  Scenario s;
  try {
    s = load_scenario(config);
  } catch (const ConfigError& e) {
    o.exit_code = 1;
    o.err = std::string("error: ") + e.what() + "\n";
    return o;
  }
  const SimulationResult res = simulate(s);
  std::ofstream file(traj_path, std::ios::binary);
  if (!file) {
    o.exit_code = 1;
    o.err = "error: cannot write " + traj_path.string() + "\n";
    return o;
  }
  write_trajectory(file, res, format);
  file.close();
  o.out = format_summary(res);
  o.exit_code = res.exit_code();
  if (res.status != RunStatus::Ok) o.err = "error: " + res.message + "\n";
  return o;
}

}  // namespace

CommandResult run_simulate(const SimulateOptions& opts) {
  if (opts.configs.empty()) return failure("no configuration files given");
  const std::string ext = opts.format == OutputFormat::Csv ? ".csv" : ".jsonl";
  std::vector<fs::path> targets;
  const bool many = opts.configs.size() > 1;
  if (many && !opts.out.empty()) {
    std::error_code ec;
    fs::create_directories(opts.out, ec);
    if (ec) return failure("cannot create output directory " + opts.out);
  }
  for (const std::string& c : opts.configs) {
    if (!many && !opts.out.empty())
      targets.emplace_back(opts.out);
    else if (many && !opts.out.empty())
      targets.push_back(fs::path(opts.out) / fs::path(c).stem().concat(ext));
    else
      targets.push_back(fs::path(c).replace_extension(ext));
  }
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = i + 1; j < targets.size(); ++j)
      if (targets[i] == targets[j]) return failure("configs " + opts.configs[i] + " and " + opts.configs[j] +
                                                   " would write the same output " + targets[i].string());

  std::vector<RunOutcome> outcomes(opts.configs.size());
  const int workers = std::clamp(thread_budget(opts.threads), 1, static_cast<int>(opts.configs.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < opts.configs.size(); i = next++)
      outcomes[i] = run_one(opts.configs[i], targets[i], opts.format);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  CommandResult res;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (many && !outcomes[i].out.empty()) res.out += "config=" + opts.configs[i] + "\n";
    res.out += outcomes[i].out;
    res.err += outcomes[i].err;
    res.exit_code = std::max(res.exit_code, outcomes[i].exit_code);
  }
  return res;
}

std::optional<RotationFormat> parse_rotation_format(const std::string& name) {
  if (name == "euler") return RotationFormat::Euler;
  if (name == "fedorov") return RotationFormat::Fedorov;
  if (name == "quat") return RotationFormat::Quat;
  if (name == "matrix") return RotationFormat::Matrix;
  return std::nullopt;
}

CommandResult run_convert_rotation(RotationFormat from, RotationFormat to, const std::vector<double>& values) {
  const std::size_t expected = from == RotationFormat::Quat ? 4 : from == RotationFormat::Matrix ? 9 : 3;
  if (values.size() != expected)
    return failure("expected " + std::to_string(expected) + " values, got " + std::to_string(values.size()));
  for (double v : values)
    if (!std::isfinite(v)) return failure("values must be finite");
  CommandResult res;
  try {
    RotationMatrix c;
    switch (from) {
      case RotationFormat::Euler:
        c = euler_to_rotation({values[0], values[1], values[2]});
        break;
      case RotationFormat::Fedorov:
        c = rotation_from_fedorov({Vec3(values[0], values[1], values[2])});
        break;
      case RotationFormat::Quat: {
        const Quaternion q{values[0], Vec3(values[1], values[2], values[3])};
        const double n = q.norm();
        if (std::abs(n - 1.0) > 1e-6) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.17g", n);
          return failure(std::string("quaternion norm ") + buf + " is not within 1e-6 of 1");
        }
        if (std::abs(n - 1.0) > kUnitQuaternionTol)
          res.err += "warning: quaternion norm " + format_number(n) + " renormalized\n";
        c = rotation_from_quat(UnitQuaternion::normalized(q));
        break;
      }
      case RotationFormat::Matrix: {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = values[i];
        c = RotationMatrix(m);
        break;
      }
    }
    std::vector<double> out;
    switch (to) {
      case RotationFormat::Euler: {
        const EulerAngles e = euler_from_rotation(c);
        out = {e.phi, e.theta, e.psi};
        break;
      }
      case RotationFormat::Fedorov: {
        const Vec3 f = fedorov_from_rotation(c).f;
        out = {f.x(), f.y(), f.z()};
        break;
      }
      case RotationFormat::Quat: {
        const Eigen::Vector4d q = quat_from_rotation(c).value().as_vector();
        out = {q(0), q(1), q(2), q(3)};
        break;
      }
      case RotationFormat::Matrix:
        for (int i = 0; i < 9; ++i) out.push_back(c.matrix()(i / 3, i % 3));
        break;
    }
    res.out = join_numbers(out, ' ') + "\n";
  } catch (const Error& e) {
    return {1, "", res.err + "error: " + std::string(e.what()) + "\n"};
  }
  return res;
}

std::optional<std::vector<double>> parse_coeff_list(const std::string& text) {
  std::vector<double> v;
  for (const std::string& part : split(text, ',')) {
    const auto d = parse_double(part);
    if (!d || !std::isfinite(*d)) return std::nullopt;
    v.push_back(*d);
  }
  if (v.size() != 4) return std::nullopt;
  return v;
}

namespace {

std::optional<std::vector<std::string>> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    lines.push_back(t);
  }
  return lines;
}

// dim x dim matrix, one row per line.
Eigen::MatrixXd read_matrix_csv(const std::string& path, int dim) {
  const auto lines = read_lines(path);
  if (!lines) throw std::runtime_error("cannot read " + path);
  if (static_cast<int>(lines->size()) != dim)
    throw std::runtime_error(path + ": expected " + std::to_string(dim) + " rows, got " + std::to_string(lines->size()));
  Eigen::MatrixXd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto cells = split((*lines)[r], ',');
    if (static_cast<int>(cells.size()) != dim)
      throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " needs " + std::to_string(dim) + " values");
    for (int c = 0; c < dim; ++c) {
      const auto v = parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " column " + std::to_string(c + 1) +
                                 " is not a finite number");
      m(r, c) = *v;
    }
  }
  return m;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string s;
  for (int r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (int c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    s += join_numbers(row, ',') + "\n";
  }
  return s;
}

struct FieldCsv {
  Grid3<Mat3> u;
  std::optional<Grid3<Vec4>> r;
};

FieldCsv read_field_csv(const std::string& path, double h) {
  const auto lines = read_lines(path);
  if (!lines) throw std::runtime_error("cannot read " + path);
  if (lines->empty()) throw std::runtime_error(path + ": missing header");
  const auto header = split((*lines)[0], ',');
  std::vector<std::string> names;
  for (const auto& hname : header) names.push_back(trim(hname));
  static const std::vector<std::string> base = {"x",   "y",   "z",   "u11", "u12", "u13",
                                                "u21", "u22", "u23", "u31", "u32", "u33"};
  static const std::vector<std::string> with_r = {"r0", "r1", "r2", "r3"};
  const bool has_r = names.size() == base.size() + 4;
  if (names.size() != base.size() && !has_r)
    throw std::runtime_error(path + ": header must be x,y,z,u11..u33 with optional r0..r3");
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& want = i < base.size() ? base[i] : with_r[i - base.size()];
    if (names[i] != want) throw std::runtime_error(path + ": header column " + std::to_string(i + 1) + " must be " + want);
  }
  struct Row {
    Vec3 x;
    Mat3 u;
    Vec4 r;
  };
  std::vector<Row> rows;
  for (std::size_t l = 1; l < lines->size(); ++l) {
    const auto cells = split((*lines)[l], ',');
    if (cells.size() != names.size())
      throw std::runtime_error(path + ": data line " + std::to_string(l) + " has " + std::to_string(cells.size()) +
                               " columns, expected " + std::to_string(names.size()));
    std::vector<double> v;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto d = parse_double(cells[c]);
      if (!d || !std::isfinite(*d))
        throw std::runtime_error(path + ": data line " + std::to_string(l) + " column " + names[c] +
                                 " is not a finite number");
      v.push_back(*d);
    }
    Row row;
    row.x = Vec3(v[0], v[1], v[2]);
    for (int i = 0; i < 9; ++i) row.u(i / 3, i % 3) = v[3 + i];
    row.r = has_r ? Vec4(v[12], v[13], v[14], v[15]) : Vec4::Zero();
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Vec3 lo = rows[0].x;
  for (const Row& r : rows) lo = lo.cwiseMin(r.x);
  std::vector<Eigen::Vector3i> idx;
  Eigen::Vector3i n = Eigen::Vector3i::Zero();
  for (const Row& r : rows) {
    Eigen::Vector3i k;
    for (int a = 0; a < 3; ++a) {
      const double f = (r.x(a) - lo(a)) / h;
      k(a) = static_cast<int>(std::lround(f));
      if (std::abs(f - k(a)) > 1e-6) throw std::runtime_error(path + ": point spacing does not match --h");
    }
    n = n.cwiseMax(k + Eigen::Vector3i::Ones());
    idx.push_back(k);
  }
  const long long cells = static_cast<long long>(n(0)) * n(1) * n(2);
  if (cells != static_cast<long long>(rows.size()))
    throw std::runtime_error(path + ": points do not fill a rectangular grid");
  FieldCsv f;
  f.u = Grid3<Mat3>(n(0), n(1), n(2), h, lo, Mat3::Constant(std::nan("")));
  if (has_r) f.r = Grid3<Vec4>(n(0), n(1), n(2), h, lo);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Mat3& slot = f.u.at(idx[i](0), idx[i](1), idx[i](2));
    if (!std::isnan(slot(0, 0))) throw std::runtime_error(path + ": duplicate grid point");
    slot = rows[i].u;
    if (has_r) f.r->at(idx[i](0), idx[i](1), idx[i](2)) = rows[i].r;
  }
  return f;
}

}  // namespace

CommandResult run_constitutive(const ConstitutiveOptions& opts) {
  if (opts.dim != 2 && opts.dim != 3) return failure("--dim must be 2 or 3");
  RheologyCoeffs r;
  r.basis = opts.basis;
  if (opts.coeffs) {
    if (opts.coeffs->size() != 4) return failure("--coeffs needs four values r0,r1,r2,r3");
    std::copy(opts.coeffs->begin(), opts.coeffs->end(), r.r.begin());
  }
  CommandResult res;
  try {
    switch (opts.action) {
      case ConstitutiveAction::Apply:
        if (!opts.coeffs) return failure("--coeffs is required");
        res.out = matrix_csv(constitutive_apply(r, read_matrix_csv(opts.input, opts.dim)));
        break;
      case ConstitutiveAction::Invert:
        if (!opts.coeffs) return failure("--coeffs is required");
        res.out = matrix_csv(constitutive_invert(r, read_matrix_csv(opts.input, opts.dim)));
        break;
      case ConstitutiveAction::Moduli: {
        if (!opts.coeffs) return failure("--coeffs is required");
        const Moduli m = moduli(r, opts.dim);
        res.out = "young=" + format_number(m.young) + "\nshear=" + format_number(m.shear) +
                  "\npoisson=" + format_number(m.poisson) +
                  "\nidentity_residual=" + format_number(m.young - 2.0 * m.shear * (1.0 + m.poisson)) + "\n";
        break;
      }
      case ConstitutiveAction::Div: {
        if (opts.dim != 3) return failure("div needs --dim 3");
        if (!(opts.h > 0.0)) return failure("div needs a positive --h");
        const FieldCsv f = read_field_csv(opts.input, opts.h);
        if (!f.r && !opts.coeffs) return failure("--coeffs is required when the field has no r0..r3 columns");
        const Grid3<Vec3> d = f.r ? div_stress_field(f.u, *f.r, opts.basis) : div_stress_field(f.u, r);
        res.out = "x,y,z,div1,div2,div3\n";
        for (int k = 0; k < d.nz; ++k)
          for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
              const Vec3 x = d.position(i, j, k);
              const Vec3& v = d.at(i, j, k);
              res.out += join_numbers({x.x(), x.y(), x.z(), v.x(), v.y(), v.z()}, ',') + "\n";
            }
        break;
      }
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    if (e.kind() == ErrorKind::Incorrect) msg += " (invertibility requires (r1 tr I + r2) r2 r3 != 0)";
    return failure(msg);
  } catch (const std::runtime_error& e) {
    return failure(e.what());
  }
  if (!opts.out.empty()) {
    std::ofstream file(opts.out, std::ios::binary);
    if (!file) return failure("cannot write " + opts.out);
    file << res.out;
    res.out.clear();
  }
  return res;
}

}  // namespace screwdyn::sim
