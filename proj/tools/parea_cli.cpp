#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "parea/config.hpp"
#include "parea/error.hpp"
#include "parea/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"p-area minimizers of graphs: solve, evaluate, verify, trace"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", std::string(parea::kVersion));

  std::string command, target, config_path;
  std::optional<double> h, eps_min, tol;
  std::optional<std::string> out, field, boundary, curvature;
  std::optional<std::uint64_t> seed;
  std::optional<int> dim, bumps;

  app.add_option("command", command, "solve | parea | verify | singular | trace | examples | rank");
  app.add_option("target", target, "catalog surface (7.1a:theta=..., 7.1b:theta=...,eta=..., "
                                   "7.2, pauls-u, pauls-v, check-u) or 'all' for examples");
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--h", h, "grid spacing");
  app.add_option("--eps-min", eps_min, "smallest epsilon of the solver schedule");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "seed for random test families");
  app.add_option("--tol", tol, "jump-defect tolerance for verdicts");
  app.add_option("--field", field, "standard-contact | zero | custom");
  app.add_option("--dim", dim, "dimension m");
  app.add_option("--boundary", boundary, "rho, a catalog surface, or an expression");
  app.add_option("--curvature", curvature, "constant or expression for H");
  app.add_option("--bumps", bumps, "number of random test bumps for verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? parea::kExitOk : parea::kExitError;
  }

  parea::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = parea::load_config(config_path);
    if (!command.empty()) cfg.command = parea::parse_command(command);
    else if (config_path.empty()) throw parea::ConfigError("command", "missing command");
    if (!target.empty()) cfg.target = target;
    if (h) cfg.h = *h;
    if (eps_min) cfg.solve.epsilon_schedule = parea::epsilon_schedule_to(*eps_min);
    if (out) cfg.out_dir = *out;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tol = *tol;
    if (field) cfg.field = *field;
    if (dim) {
      cfg.dim = *dim;
      // Keep the default unit ball / cube when only the dimension changes.
      auto& d = cfg.domain;
      if (static_cast<int>(d.center.size()) != *dim) d.center.assign(*dim, 0.0);
      if (static_cast<int>(d.lo.size()) != *dim) d.lo.assign(*dim, -1.0);
      if (static_cast<int>(d.hi.size()) != *dim) d.hi.assign(*dim, 1.0);
    }
    if (boundary) cfg.boundary = *boundary;
    if (curvature) cfg.curvature = *curvature;
    if (bumps) cfg.bumps = *bumps;
  } catch (const parea::Error& e) {
    std::cerr << "parea: " << e.what() << '\n';
    return parea::kExitError;
  }
  return parea::run(cfg, std::cout);
}
