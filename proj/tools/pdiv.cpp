// pdiv: barrier solves, value curves, sweeps and Monte Carlo checks for
// periodic dividend strategies with fixed transaction costs.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pdiv/commands.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Periodic dividend barriers with fixed transaction costs"};
  app.require_subcommand(1);

  std::string config_path, out_path, x_list, param;
  std::uint64_t seed = 0, paths = 0;
  double dt = 0.0, from = 0.0, to = 0.0;
  int steps = 0;
  bool dump = false;

  std::string chosen;
  for (const char* name : {"solve", "value", "sweep", "simulate", "exit-probe"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value run file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV destination (default stdout)");
    sub->add_option("--seed", seed, "simulation seed");
    sub->add_option("--paths", paths, "simulation path count");
    sub->add_option("--dt", dt, "diffusion monitoring step");
    sub->add_option("--param", param, "sweep parameter: kappa, gamma, sigma, p1, M, c");
    sub->add_option("--from", from, "sweep start");
    sub->add_option("--to", to, "sweep end");
    sub->add_option("--steps", steps, "sweep point count");
    sub->add_option("--x", x_list, "comma separated surplus levels");
    sub->add_flag("--dump-config", dump, "print the effective config and exit");
    sub->callback([&chosen, sub] { chosen = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(config_path);
  pdiv::RunConfig cfg = pdiv::parse_config(in, config_path);
  // Command-line flags win over the file.
  auto* sub = app.get_subcommand(chosen);
  if (sub->count("--seed")) cfg.seed = seed;
  if (sub->count("--paths")) cfg.paths = paths;
  if (sub->count("--dt")) cfg.dt = dt;
  if (sub->count("--param")) cfg.sweep_param = param;
  if (sub->count("--from")) cfg.sweep_from = from;
  if (sub->count("--to")) cfg.sweep_to = to;
  if (sub->count("--steps")) cfg.sweep_steps = steps;
  if (sub->count("--x")) cfg.x = pdiv::detail::parse_list(x_list, "--x");

  std::ostringstream buf;
  if (dump) {
    buf << pdiv::dump_config(cfg);
  } else if (chosen == "solve") {
    pdiv::cmd_solve(cfg, buf);
  } else if (chosen == "value") {
    pdiv::cmd_value(cfg, buf);
  } else if (chosen == "sweep") {
    pdiv::cmd_sweep(cfg, buf);
  } else if (chosen == "simulate") {
    pdiv::cmd_simulate(cfg, buf);
  } else {
    pdiv::cmd_exit_probe(cfg, buf);
  }

  if (out_path.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw pdiv::ConfigError("cannot open --out " + out_path);
    out << buf.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pdiv::ModelError& e) {
    std::cerr << "pdiv: config error: " << e.what() << "\n";
    return 2;
  } catch (const pdiv::SimulationError& e) {
    std::cerr << "pdiv: simulation error: " << e.what() << "\n";
    return 4;
  } catch (const pdiv::SolverError& e) {
    std::cerr << "pdiv: solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pdiv: solver error: " << e.what() << "\n";
    return 3;
  }
}
