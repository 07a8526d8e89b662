// pidz: simulate and analyse PI / dead-zone compensating PBC scenarios.
//
//   pidz simulate scenario.json --output-dir out [--controller pi --controller pidz]
//   pidz analyze scenario.json
//   pidz report out/
//   pidz export-suite scenarios/

#include "pidz/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Passivity-based control with dead-zone compensation: simulation and tuning analysis"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string output_dir = ".";
  std::optional<double> dt, horizon;
  std::vector<std::string> controllers;
  std::optional<std::string> wiring;
  std::optional<unsigned> seed;

  auto* sim = app.add_subcommand("simulate", "Integrate a scenario and write <label>.csv and <label>.metrics.txt");
  sim->add_option("scenario", scenario_path, "Scenario document (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--output-dir", output_dir, "Directory for outputs");
  sim->add_option("--dt", dt, "Integration step [s]");
  sim->add_option("--horizon", horizon, "Final time [s]");
  sim->add_option("--controller", controllers, "pi, pidz or none; repeat to compare")
      ->check(CLI::IsMember({"pi", "pidz", "none"}))
      ->take_all()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sim->add_option("--wiring", wiring, "ideal or physical")->check(CLI::IsMember({"ideal", "physical"}));
  sim->add_option("--seed", seed, "Reserved; simulation is deterministic");

  std::optional<std::string> analyze_out;
  auto* ana = app.add_subcommand("analyze", "Linearised spectrum and tuning-rule check at the setpoint");
  ana->add_option("scenario", scenario_path, "Scenario document (JSON)")->required()->check(CLI::ExistingFile);
  ana->add_option("--output-dir", analyze_out, "Also write <label>.analysis.{txt,csv} here");

  std::string suite_dir;
  auto* rep = app.add_subcommand("report", "Tabulate steady-state errors from a directory of metrics files");
  rep->add_option("suite_dir", suite_dir, "Directory of *.metrics.txt files")->required();

  std::string export_dir;
  auto* exp = app.add_subcommand("export-suite", "Write the built-in manipulator scenarios as JSON files");
  exp->add_option("dir", export_dir, "Destination directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pidz::cli::kUsage;
  }

  using namespace pidz;
  if (*sim) {
    cli::SimulateOptions opt;
    opt.dt = dt;
    opt.horizon = horizon;
    opt.seed = seed;
    for (const auto& c : controllers) opt.controllers.push_back(parse_controller(c));
    if (wiring) opt.wiring = parse_wiring(*wiring);
    return cli::cmd_simulate(scenario_path, output_dir, opt, std::cout, std::cerr);
  }
  if (*ana) return cli::cmd_analyze(scenario_path, analyze_out, std::cout, std::cerr);
  if (*rep) return cli::cmd_report(suite_dir, std::cout, std::cerr);
  if (*exp) return cli::cmd_export_suite(export_dir, std::cout, std::cerr);
  return cli::kUsage;
}
