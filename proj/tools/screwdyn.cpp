#include <iostream>

#include "CLI11.hpp"
#include "screwdyn/sim/commands.hpp"

using namespace screwdyn;
using namespace screwdyn::sim;

namespace {

int emit(const CommandResult& r) {
  std::cout << r.out << std::flush;
  std::cerr << r.err << std::flush;
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid and multibody dynamics, rotation conversion and constitutive tools"};
  app.require_subcommand(1);

  SimulateOptions sim_opts;
  std::string format = "csv";
  auto* simulate = app.add_subcommand("simulate", "Integrate one or more JSON scenarios");
  simulate->add_option("configs", sim_opts.configs, "Scenario files")->required();
  simulate->add_option("--out", sim_opts.out, "Trajectory file (one config) or directory (several)");
  simulate->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  std::string from, to;
  std::vector<double> values;
  auto* convert = app.add_subcommand("convert-rotation", "Convert between rotation representations");
  const auto kinds = CLI::IsMember({"euler", "fedorov", "quat", "matrix"});
  convert->add_option("--from", from, "Input representation")->required()->check(kinds);
  convert->add_option("--to", to, "Output representation")->required()->check(kinds);
  convert->add_option("values", values, "Input components")->required();

  ConstitutiveOptions cons;
  std::string coeffs, basis = "symant";
  auto* constitutive = app.add_subcommand("constitutive", "Isotropic constitutive relations");
  constitutive->add_option("--coeffs", coeffs, "r0,r1,r2,r3");
  constitutive->add_option("--dim", cons.dim, "2 or 3")->check(CLI::IsMember({2, 3}));
  constitutive->add_option("--basis", basis, "symant or transpose")->check(CLI::IsMember({"symant", "transpose"}));
  constitutive->add_option("--out", cons.out, "Write the result here instead of stdout");
  constitutive->require_subcommand(1);
  auto* apply = constitutive->add_subcommand("apply", "Stress from a U matrix CSV");
  apply->add_option("file", cons.input)->required();
  auto* invert = constitutive->add_subcommand("invert", "U from a stress matrix CSV");
  invert->add_option("file", cons.input)->required();
  constitutive->add_subcommand("moduli", "Young, shear and Poisson moduli");
  auto* div = constitutive->add_subcommand("div", "Divergence of the stress field on a grid CSV");
  div->set_help_flag("--help", "Print this help message and exit");
  div->add_option("file", cons.input)->required();
  div->add_option("--h", cons.h, "Grid spacing")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (simulate->parsed()) {
    sim_opts.format = format == "jsonl" ? OutputFormat::Jsonl : OutputFormat::Csv;
    return emit(run_simulate(sim_opts));
  }
  if (convert->parsed())
    return emit(run_convert_rotation(*parse_rotation_format(from), *parse_rotation_format(to), values));

  if (!coeffs.empty()) {
    cons.coeffs = parse_coeff_list(coeffs);
    if (!cons.coeffs) {
      std::cerr << "error: --coeffs must be four comma-separated numbers\n";
      return 1;
    }
  }
  cons.basis = basis == "transpose" ? BasisTag::Transpose : BasisTag::SymAnt;
  if (apply->parsed())
    cons.action = ConstitutiveAction::Apply;
  else if (invert->parsed())
    cons.action = ConstitutiveAction::Invert;
  else if (div->parsed())
    cons.action = ConstitutiveAction::Div;
  else
    cons.action = ConstitutiveAction::Moduli;
  return emit(run_constitutive(cons));
}
