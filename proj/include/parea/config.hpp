#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parea/field.hpp"
#include "parea/grid.hpp"
#include "parea/solver.hpp"

namespace parea {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Solve, PArea, Verify, Singular, Trace, Examples, Rank };

const char* to_string(Command c);
Command parse_command(const std::string& name);

struct DomainConfig {
  std::string shape = "disc";  // disc | rectangle | annulus
  std::vector<double> center = {0.0, 0.0};
  double radius = 1.0;   // disc, and the outer radius of an annulus
  double r_inner = 0.5;  // annulus
  std::vector<double> lo = {-1.0, -1.0};
  std::vector<double> hi = {1.0, 1.0};
};

/// Everything a command needs. Expressions use x1..xm (x, y in the plane);
/// boundary expressions may also use theta and r about the domain centre.
struct RunConfig {
  Command command = Command::PArea;
  std::string target;  // catalog surface name, or "all" for examples
  int dim = 2;
  std::string field = "standard-contact";  // standard-contact | zero | custom
  std::vector<std::string> field_components;
  std::string curvature = "0";
  std::string boundary = "rho";  // "rho", a catalog surface, or an expression
  DomainConfig domain;
  double h = 1.0 / 64.0;
  SolveConfig solve;
  std::string out_dir = "parea-out";
  std::uint64_t seed = 1;
  double tol = -1.0;  // verify: jump-defect tolerance, negative for 10 h + 1e-6
  int bumps = 50;     // verify: random test bumps
  std::vector<Eigen::Vector2d> trace_seeds;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses one JSON document; unknown keys are errors. Syntax errors report
/// line and column.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Canonical JSON of the whole configuration (what summaries echo).
std::string to_json(const RunConfig& cfg);

/// 1, 1/2, ... down to eps_min (inclusive up to rounding).
std::vector<double> epsilon_schedule_to(double eps_min);

DomainSpec make_domain(const RunConfig& cfg);
VectorFieldSpec make_field(const RunConfig& cfg);
CurvatureSpec make_curvature(const RunConfig& cfg);
BoundaryData make_boundary(const RunConfig& cfg);

}  // namespace parea
