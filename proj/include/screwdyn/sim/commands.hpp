#pragma once

#include <optional>
#include <string>
#include <vector>

#include "screwdyn/constitutive.hpp"
#include "screwdyn/sim/output.hpp"

namespace screwdyn::sim {

/// Captured outcome of a subcommand: exit status plus stdout/stderr text.
struct CommandResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

struct SimulateOptions {
  std::vector<std::string> configs;
  /// One config: trajectory file path. Several: output directory. When empty
  /// the trajectory goes next to each config with the format's extension.
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  /// Scenario-level parallelism; 0 reads SCREWDYN_THREADS (default 1).
  int threads = 0;
};

CommandResult run_simulate(const SimulateOptions& opts);

enum class RotationFormat { Euler, Fedorov, Quat, Matrix };

std::optional<RotationFormat> parse_rotation_format(const std::string& name);

CommandResult run_convert_rotation(RotationFormat from, RotationFormat to, const std::vector<double>& values);

enum class ConstitutiveAction { Apply, Invert, Moduli, Div };

struct ConstitutiveOptions {
  std::optional<std::vector<double>> coeffs;  // r0..r3
  int dim = 3;
  BasisTag basis = BasisTag::SymAnt;
  ConstitutiveAction action = ConstitutiveAction::Moduli;
  std::string input;  // CSV path for apply/invert/div
  double h = 0.0;     // grid spacing for div
  std::string out;    // empty: stdout
};

/// Parses "r0,r1,r2,r3".
std::optional<std::vector<double>> parse_coeff_list(const std::string& text);

CommandResult run_constitutive(const ConstitutiveOptions& opts);

}  // namespace screwdyn::sim
