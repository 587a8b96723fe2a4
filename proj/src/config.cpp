#include "parea/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parea/catalog.hpp"
#include "parea/error.hpp"
#include "parea/expression.hpp"

namespace parea {

using nlohmann::json;

namespace {

constexpr std::pair<Command, const char*> kCommands[] = {
    {Command::Solve, "solve"},       {Command::PArea, "parea"}, {Command::Verify, "verify"},
    {Command::Singular, "singular"}, {Command::Trace, "trace"}, {Command::Examples, "examples"},
    {Command::Rank, "rank"}};

std::vector<std::string> coordinate_names(int m) {
  std::vector<std::string> v;
  for (int k = 1; k <= m; ++k) v.push_back("x" + std::to_string(k));
  if (m == 2) {
    v.push_back("x");
    v.push_back("y");
  }
  return v;
}

std::vector<double> coordinate_values(const Eigen::VectorXd& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  if (x.size() == 2) {
    v.push_back(x(0));
    v.push_back(x(1));
  }
  return v;
}

Expression parse_expr(const std::string& key, const std::string& text,
                      const std::vector<std::string>& vars) {
  try {
    return Expression::parse(text, vars);
  } catch (const ArgumentError& e) {
    throw ConfigError(key, e.what());
  }
}

// Typed access with the key path in every message.
template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "wrong type (" + std::string(j.type_name()) + ")");
  }
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
  }
}

LinearSolver parse_linear_solver(const std::string& s) {
  if (s == "auto") return LinearSolver::Auto;
  if (s == "direct") return LinearSolver::Direct;
  if (s == "cg") return LinearSolver::ConjugateGradient;
  throw ConfigError("solver.linear_solver", "expected auto, direct or cg, got '" + s + "'");
}

const char* to_string(LinearSolver s) {
  switch (s) {
    case LinearSolver::Auto: return "auto";
    case LinearSolver::Direct: return "direct";
    case LinearSolver::ConjugateGradient: return "cg";
  }
  return "auto";
}

bool is_catalog(const std::string& name) {
  try {
    catalog_surface(name);
    return true;
  } catch (const ArgumentError&) {
    return false;
  }
}

}  // namespace

const char* to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (const auto& [cmd, n] : kCommands) {
    if (name == n) return cmd;
  }
  throw ConfigError("command", "unknown command '" + name + "'");
}

std::vector<double> epsilon_schedule_to(double eps_min) {
  if (!(eps_min > 0.0) || eps_min > 1.0) {
    throw ConfigError("eps_min", "must lie in (0, 1]");
  }
  std::vector<double> s;
  for (double e = 1.0; e >= eps_min * (1.0 - 1e-12); e *= 0.5) s.push_back(e);
  return s;
}

void RunConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h", "must be positive");
  if (dim < 1 || dim > 16) throw ConfigError("dim", "must lie in [1, 16]");
  if (field != "standard-contact" && field != "zero" && field != "custom") {
    throw ConfigError("field", "expected standard-contact, zero or custom, got '" + field + "'");
  }
  if (field == "standard-contact" && dim % 2 != 0) {
    throw ConfigError("dim", "standard-contact needs an even dimension");
  }
  if (field == "custom" && static_cast<int>(field_components.size()) != dim) {
    throw ConfigError("field_components", "custom field needs one expression per coordinate");
  }
  if (bumps < 0) throw ConfigError("bumps", "must be non-negative");
  if (out_dir.empty()) throw ConfigError("out", "must not be empty");
  const bool needs_target = command == Command::PArea || command == Command::Verify ||
                            command == Command::Singular || command == Command::Trace ||
                            command == Command::Examples;
  if (needs_target) {
    if (target.empty()) throw ConfigError("target", "this command needs a catalog surface");
    if (!(command == Command::Examples && target == "all") && !is_catalog(target)) {
      throw ConfigError("target", "unknown catalog surface '" + target + "'");
    }
  }
  try {
    solve.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("solver", e.what());
  }
  // Build once so bad expressions and domains surface here.
  make_domain(*this);
  make_field(*this);
  make_curvature(*this);
  if (command == Command::Solve) make_boundary(*this);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < at; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", "line " + std::to_string(line) + ", column " + std::to_string(col) +
                              ": " + e.what());
  }
  check_keys(j, "",
             {"command", "target", "dim", "field", "field_components", "curvature", "boundary",
              "domain", "h", "solver", "out", "seed", "tol", "bumps", "seeds"});
  RunConfig c;
  if (j.contains("command")) c.command = parse_command(get<std::string>(j["command"], "command"));
  if (j.contains("target")) c.target = get<std::string>(j["target"], "target");
  if (j.contains("dim")) c.dim = get<int>(j["dim"], "dim");
  if (j.contains("field")) c.field = get<std::string>(j["field"], "field");
  if (j.contains("field_components")) {
    c.field_components = get<std::vector<std::string>>(j["field_components"], "field_components");
  }
  if (j.contains("curvature")) c.curvature = get<std::string>(j["curvature"], "curvature");
  if (j.contains("boundary")) c.boundary = get<std::string>(j["boundary"], "boundary");
  if (j.contains("domain")) {
    const json& d = j["domain"];
    check_keys(d, "domain", {"shape", "center", "radius", "r_inner", "lo", "hi"});
    if (d.contains("shape")) c.domain.shape = get<std::string>(d["shape"], "domain.shape");
    if (d.contains("center")) {
      c.domain.center = get<std::vector<double>>(d["center"], "domain.center");
    }
    if (d.contains("radius")) c.domain.radius = get<double>(d["radius"], "domain.radius");
    if (d.contains("r_inner")) c.domain.r_inner = get<double>(d["r_inner"], "domain.r_inner");
    if (d.contains("lo")) c.domain.lo = get<std::vector<double>>(d["lo"], "domain.lo");
    if (d.contains("hi")) c.domain.hi = get<std::vector<double>>(d["hi"], "domain.hi");
  }
  if (j.contains("h")) c.h = get<double>(j["h"], "h");
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver",
               {"epsilon_schedule", "eps_min", "sigma_schedule", "newton_max_iters", "newton_tol",
                "damping", "linear_tol", "tau_sing", "stop_tol", "linear_solver"});
    SolveConfig& sc = c.solve;
    if (s.contains("epsilon_schedule") && s.contains("eps_min")) {
      throw ConfigError("solver.eps_min", "give either eps_min or epsilon_schedule");
    }
    if (s.contains("epsilon_schedule")) {
      sc.epsilon_schedule = get<std::vector<double>>(s["epsilon_schedule"], "solver.epsilon_schedule");
    }
    if (s.contains("eps_min")) {
      sc.epsilon_schedule = epsilon_schedule_to(get<double>(s["eps_min"], "solver.eps_min"));
    }
    if (s.contains("sigma_schedule")) {
      sc.sigma_schedule = get<std::vector<double>>(s["sigma_schedule"], "solver.sigma_schedule");
    }
    if (s.contains("newton_max_iters")) {
      sc.newton_max_iters = get<int>(s["newton_max_iters"], "solver.newton_max_iters");
    }
    if (s.contains("newton_tol")) sc.newton_tol = get<double>(s["newton_tol"], "solver.newton_tol");
    if (s.contains("damping")) sc.damping = get<double>(s["damping"], "solver.damping");
    if (s.contains("linear_tol")) sc.linear_tol = get<double>(s["linear_tol"], "solver.linear_tol");
    if (s.contains("tau_sing")) sc.tau_sing = get<double>(s["tau_sing"], "solver.tau_sing");
    if (s.contains("stop_tol")) sc.stop_tol = get<double>(s["stop_tol"], "solver.stop_tol");
    if (s.contains("linear_solver")) {
      sc.linear_solver =
          parse_linear_solver(get<std::string>(s["linear_solver"], "solver.linear_solver"));
    }
  }
  if (j.contains("out")) c.out_dir = get<std::string>(j["out"], "out");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j["seed"], "seed");
  if (j.contains("tol")) c.tol = get<double>(j["tol"], "tol");
  if (j.contains("bumps")) c.bumps = get<int>(j["bumps"], "bumps");
  if (j.contains("seeds")) {
    for (const auto& p : get<std::vector<std::vector<double>>>(j["seeds"], "seeds")) {
      if (p.size() != 2) throw ConfigError("seeds", "each seed is a pair [x, y]");
      c.trace_seeds.emplace_back(p[0], p[1]);
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["target"] = c.target;
  j["dim"] = c.dim;
  j["field"] = c.field;
  j["field_components"] = c.field_components;
  j["curvature"] = c.curvature;
  j["boundary"] = c.boundary;
  j["domain"] = {{"shape", c.domain.shape}, {"center", c.domain.center},
                 {"radius", c.domain.radius}, {"r_inner", c.domain.r_inner},
                 {"lo", c.domain.lo},         {"hi", c.domain.hi}};
  j["h"] = c.h;
  const SolveConfig& s = c.solve;
  j["solver"] = {{"epsilon_schedule", s.epsilon_schedule},
                 {"sigma_schedule", s.sigma_schedule},
                 {"newton_max_iters", s.newton_max_iters},
                 {"newton_tol", s.newton_tol},
                 {"damping", s.damping},
                 {"linear_tol", s.linear_tol},
                 {"tau_sing", s.tau_sing},
                 {"stop_tol", s.stop_tol},
                 {"linear_solver", to_string(s.linear_solver)}};
  j["out"] = c.out_dir;
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  j["bumps"] = c.bumps;
  json seeds = json::array();
  for (const auto& p : c.trace_seeds) seeds.push_back({p.x(), p.y()});
  j["seeds"] = seeds;
  return j.dump(2);
}

DomainSpec make_domain(const RunConfig& c) {
  const DomainConfig& d = c.domain;
  auto vec = [&](const std::vector<double>& v, const char* key) {
    if (static_cast<int>(v.size()) != c.dim) {
      throw ConfigError(std::string("domain.") + key, "needs " + std::to_string(c.dim) + " entries");
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), c.dim).eval();
  };
  try {
    if (d.shape == "disc") return DomainSpec::disc(vec(d.center, "center"), d.radius);
    if (d.shape == "annulus") {
      return DomainSpec::annulus(vec(d.center, "center"), d.r_inner, d.radius);
    }
    if (d.shape == "rectangle") return DomainSpec::rectangle(vec(d.lo, "lo"), vec(d.hi, "hi"));
  } catch (const ArgumentError& e) {
    throw ConfigError("domain", e.what());
  }
  throw ConfigError("domain.shape", "expected disc, annulus or rectangle, got '" + d.shape + "'");
}

VectorFieldSpec make_field(const RunConfig& c) {
  if (c.field == "standard-contact") return VectorFieldSpec::standard_contact(c.dim);
  if (c.field == "zero") return VectorFieldSpec::zero(c.dim);
  if (c.field != "custom") throw ConfigError("field", "unknown field '" + c.field + "'");
  const auto vars = coordinate_names(c.dim);
  std::vector<Expression> comps;
  for (std::size_t k = 0; k < c.field_components.size(); ++k) {
    comps.push_back(
        parse_expr("field_components[" + std::to_string(k) + "]", c.field_components[k], vars));
  }
  auto value = [comps](const Eigen::VectorXd& x) {
    const auto v = coordinate_values(x);
    Eigen::VectorXd out(static_cast<Index>(comps.size()));
    for (std::size_t k = 0; k < comps.size(); ++k) out(static_cast<Index>(k)) = comps[k](v);
    return out;
  };
  // Central differences; expressions are smooth wherever they are used.
  auto jacobian = [value](const Eigen::VectorXd& x) {
    const Index m = x.size();
    Eigen::MatrixXd J(m, m);
    for (Index b = 0; b < m; ++b) {
      const double step = 1e-6 * std::max(1.0, std::abs(x(b)));
      Eigen::VectorXd xp = x, xm = x;
      xp(b) += step;
      xm(b) -= step;
      J.col(b) = (value(xp) - value(xm)) / (2.0 * step);
    }
    return J;
  };
  return VectorFieldSpec::custom(c.dim, value, jacobian);
}

CurvatureSpec make_curvature(const RunConfig& c) {
  const Expression e = parse_expr("curvature", c.curvature, coordinate_names(c.dim));
  try {
    const double value = parse_constant(c.curvature);
    return value == 0.0 ? CurvatureSpec::zero() : CurvatureSpec::constant(value);
  } catch (const ArgumentError&) {
    // Depends on the coordinates.
  }
  CurvatureSpec H;
  H.H = [e](const Eigen::VectorXd& x) { return e(coordinate_values(x)); };
  return H;
}

BoundaryData make_boundary(const RunConfig& c) {
  const DomainSpec dom = make_domain(c);
  if (c.boundary == "rho") {
    if (c.dim != 2) throw ConfigError("boundary", "rho is planar");
    return BoundaryData::from_angle(boundary_rho, 0.5 * (dom.bbox_lo() + dom.bbox_hi()).head<2>());
  }
  if (c.dim == 2 && is_catalog(c.boundary)) {
    const ClosedFormSurface s = catalog_surface(c.boundary);
    return {[s](const Eigen::VectorXd& x) { return s.value(x.head<2>()); }, Smoothness::C2};
  }
  auto vars = coordinate_names(c.dim);
  vars.push_back("theta");
  vars.push_back("r");
  const Expression e = parse_expr("boundary", c.boundary, vars);
  const Eigen::VectorXd center = 0.5 * (dom.bbox_lo() + dom.bbox_hi());
  return {[e, center](const Eigen::VectorXd& x) {
            auto v = coordinate_values(x);
            const Eigen::VectorXd d = x - center;
            v.push_back(d.size() >= 2 ? std::atan2(d(1), d(0)) : 0.0);
            v.push_back(d.norm());
            return e(v);
          },
          Smoothness::C2};
}

}  // namespace parea
