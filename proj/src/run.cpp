#include "parea/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parea/catalog.hpp"
#include "parea/expression.hpp"
#include "parea/functional.hpp"
#include "parea/geometry.hpp"
#include "parea/solver.hpp"

namespace parea {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

struct CommandResult {
  int exit_code = kExitOk;
  json report = json::object();
  std::string headline;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("write failed: " + path.string());
}

bool is_unit_disc(const DomainSpec& d) {
  return d.dim() == 2 && d.shape() == DomainShape::Disc && d.center().norm() == 0.0 &&
         d.radius() == 1.0;
}

double tau_for(const RunConfig& cfg, const ScalarFieldGrid& u, const VectorFieldSpec& F) {
  return cfg.solve.tau_sing > 0.0 ? cfg.solve.tau_sing : default_singular_threshold(u, F);
}

// Expected verdict for a catalog name: 7.1a is never a minimizer, 7.1b is one
// exactly when theta + eta = 2 pi up to the period of cot (eta and eta - pi give
// the same surface), the two Pauls surfaces are not, 7.2 and the construction are.
Outcome expected_outcome(const std::string& target) {
  const std::string name = target.substr(0, target.find(':'));
  if (name == "7.1b") {
    const std::string params = target.substr(target.find(':') + 1);
    double theta = 0.0, eta = 0.0;
    std::size_t pos = 0;
    while (pos < params.size()) {
      std::size_t comma = params.find(',', pos);
      if (comma == std::string::npos) comma = params.size();
      const std::string item = params.substr(pos, comma - pos);
      const std::size_t eq = item.find('=');
      const double v = parse_constant(item.substr(eq + 1));
      (item.substr(0, eq) == "theta" ? theta : eta) = v;
      pos = comma + 1;
    }
    const double c = 1.0 / std::tan(theta) + 1.0 / std::tan(eta);
    return std::abs(c) < 1e-9 ? Outcome::Minimizer : Outcome::NotMinimizer;
  }
  if (name == "7.2" || name == "check-u") return Outcome::Minimizer;
  return Outcome::NotMinimizer;
}

std::vector<Eigen::Vector2d> default_seeds() {
  std::vector<Eigen::Vector2d> seeds;
  for (int k = 0; k < 8; ++k) {
    const double a = (k + 0.5) * kPi / 4.0;
    seeds.emplace_back(0.45 * std::cos(a), 0.45 * std::sin(a));
  }
  return seeds;
}

struct TraceOutput {
  std::vector<CharacteristicRay> rays;
  json report = json::array();
};

TraceOutput trace_from(const PlanarSurface& view, const std::vector<Eigen::Vector2d>& seeds,
                       double tau) {
  TraceOutput out;
  for (const Eigen::Vector2d& x0 : seeds) {
    json r;
    r["seed"] = vec(x0);
    try {
      CharacteristicRay ray = trace_ray(view, x0, tau);
      r["direction"] = vec(ray.direction);
      r["start"] = vec(ray.start);
      r["end"] = vec(ray.end);
      r["length"] = (ray.end - ray.start).norm();
      r["straightness"] = ray.straightness;
      r["lift_slope"] = ray.lift_slope;
      r["legendrian_defect"] = legendrian_defect(ray);
      out.rays.push_back(std::move(ray));
    } catch (const SingularityError& e) {
      r["skipped"] = e.what();
    }
    out.report.push_back(std::move(r));
  }
  return out;
}

// The part of a ray around its seed that stays margin away from every declared
// interface; a ray may bend where it crosses a kink.
CharacteristicRay clear_part(const CharacteristicRay& ray, const ClosedFormSurface& s,
                             double margin) {
  const auto far = [&](std::size_t k) { return s.distance_to_interfaces(ray.points[k]) >= margin; };
  std::size_t base = 0;
  while (base < ray.points.size() && ray.points[base] != ray.base) ++base;
  CharacteristicRay out = ray;
  out.points.clear();
  out.heights.clear();
  if (base == ray.points.size() || !far(base)) return out;
  std::size_t lo = base, hi = base;
  while (lo > 0 && far(lo - 1)) --lo;
  while (hi + 1 < ray.points.size() && far(hi + 1)) ++hi;
  out.points.assign(ray.points.begin() + lo, ray.points.begin() + hi + 1);
  out.heights.assign(ray.heights.begin() + lo, ray.heights.begin() + hi + 1);
  out.start = out.points.front();
  out.end = out.points.back();
  return out;
}

// Largest angle between a chord of the polyline and its end-to-end direction.
double chord_bend(const CharacteristicRay& ray) {
  if (ray.points.size() < 3) return 0.0;
  const Eigen::Vector2d d = (ray.end - ray.start).normalized();
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < ray.points.size(); ++k) {
    const Eigen::Vector2d c = ray.points[k + 1] - ray.points[k];
    worst = std::max(worst, std::atan2(std::abs(c.x() * d.y() - c.y() * d.x()), c.dot(d)));
  }
  return worst;
}

// ---------------------------------------------------------------- commands

CommandResult cmd_solve(const RunConfig& cfg, const fs::path& out) {
  const DomainSpec domain = make_domain(cfg);
  const VectorFieldSpec F = make_field(cfg);
  const CurvatureSpec H = make_curvature(cfg);
  const BoundaryData phi = make_boundary(cfg);
  const SolveResult r = continuation_solve(domain, cfg.h, F, H, phi, cfg.solve);

  std::ostringstream csv;
  write_grid_csv(csv, r.u);
  write_text(out / "solution.csv", csv.str());
  write_text(out / "diagnostics.json", to_json(r) + "\n");

  CommandResult res;
  res.report["converged"] = r.converged;
  res.report["stages"] = static_cast<int>(r.stages.size());
  if (!r.message.empty()) res.report["message"] = r.message;
  if (!r.stages.empty()) {
    const StageDiagnostics& last = r.stages.back();
    res.report["final_epsilon"] = last.epsilon;
    res.report["residual"] = last.residual;
    res.report["p_area"] = last.p_area;
    res.report["discrete_p_area"] = last.discrete_p_area;
    res.report["sup_u"] = last.sup_u;
    res.report["sup_grad_u"] = last.sup_grad_u;
  }
  if (cfg.boundary == "rho" && is_unit_disc(domain) && r.u.dim() == 2) {
    const MinimizerConstruction c = construct_minimizer();
    double sup = 0.0;
    for (Index i : r.u.interior_nodes()) {
      sup = std::max(sup, std::abs(r.u[i] - c.value(r.u.position(i))));
    }
    res.report["sup_diff_to_construction"] = sup;
  }
  res.exit_code = r.converged ? kExitOk : kExitError;
  std::ostringstream line;
  line << "solve: " << (r.converged ? "converged" : "NOT converged") << ", "
       << r.stages.size() << " stages";
  if (!r.stages.empty()) line << ", p-area " << r.stages.back().discrete_p_area;
  if (!r.message.empty()) line << " (" << r.message << ")";
  res.headline = line.str();
  return res;
}

CommandResult cmd_parea(const RunConfig& cfg) {
  const DomainSpec domain = make_domain(cfg);
  const ClosedFormSurface s = catalog_surface(cfg.target);
  const ScalarFieldGrid u = s.sample(build_grid(domain, cfg.h));
  const double grid = p_area(u, VectorFieldSpec::standard_contact(2), CurvatureSpec::zero());

  CommandResult res;
  res.report["surface"] = cfg.target;
  res.report["h"] = cfg.h;
  res.report["interior_nodes"] = static_cast<std::int64_t>(u.interior_nodes().size());
  res.report["grid_p_area"] = grid;
  std::ostringstream line;
  line << "parea " << cfg.target << ": grid " << grid;
  if (is_unit_disc(domain)) {
    const double exact = cfg.target == "check-u" ? minimizer_p_area(construct_minimizer())
                                                 : closed_form_p_area(s);
    res.report["closed_form_p_area"] = exact;
    res.report["grid_minus_closed_form"] = grid - exact;
    line << ", closed form " << exact;
  }
  res.headline = line.str();
  return res;
}

CommandResult cmd_verify(const RunConfig& cfg) {
  const DomainSpec domain = make_domain(cfg);
  const ClosedFormSurface s = catalog_surface(cfg.target);
  VerdictOptions opts;
  opts.defect_tol = cfg.tol;
  const MinimizerVerdict v = minimizer_verdict(s, domain, cfg.h, opts);

  const VectorFieldSpec F = VectorFieldSpec::standard_contact(2);
  const CurvatureSpec H = CurvatureSpec::zero();
  const ScalarFieldGrid u = s.sample(build_grid(domain, cfg.h));
  const double tau = tau_for(cfg, u, F);
  const SingularSet S = singular_set(u, F, tau);
  const std::vector<ScalarFieldGrid> bumps = bump_family(u, S, cfg.bumps, cfg.seed);
  const double weak = weak_solution_residual(u, F, H, tau, bumps);

  CommandResult res;
  res.report["surface"] = cfg.target;
  res.report["verdict"] = json::parse(to_json(v));
  res.report["weak_solution_residual"] = weak;
  res.report["tau"] = tau;
  res.report["bumps"] = static_cast<int>(bumps.size());
  res.exit_code = v.outcome == Outcome::Minimizer ? kExitOk : kExitVerificationFailed;
  std::ostringstream line;
  line << "verify " << cfg.target << ": " << to_string(v.outcome);
  if (v.witness) line << " (witness on " << v.witness->label << ")";
  res.headline = line.str();
  return res;
}

CommandResult cmd_singular(const RunConfig& cfg, const fs::path& out) {
  const DomainSpec domain = make_domain(cfg);
  const ClosedFormSurface s = catalog_surface(cfg.target);
  const VectorFieldSpec F = VectorFieldSpec::standard_contact(2);
  const ScalarFieldGrid u = s.sample(build_grid(domain, cfg.h));
  const double tau = tau_for(cfg, u, F);
  const SingularSet S = singular_set(u, F, tau);

  std::ostringstream csv;
  csv << "x_1,x_2,component\n";
  char buf[96];
  json comps = json::array();
  for (std::size_t c = 0; c < S.components.size(); ++c) {
    const SingularComponent& comp = S.components[c];
    double max_dist = 0.0;
    for (Index i : comp.nodes) {
      const Eigen::VectorXd x = u.position(i);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", x(0), x(1), c);
      csv << buf;
      if (!s.interfaces.empty()) max_dist = std::max(max_dist, s.distance_to_interfaces(x));
    }
    json j;
    j["nodes"] = static_cast<std::int64_t>(comp.nodes.size());
    j["measure"] = comp.measure;
    j["centroid"] = vec(comp.centroid);
    j["direction"] = vec(comp.direction);
    j["fit_residual"] = comp.fit_residual;
    if (!s.interfaces.empty()) j["max_distance_to_interfaces"] = max_dist;
    comps.push_back(std::move(j));
  }
  write_text(out / "singular_nodes.csv", csv.str());

  const Eigen::VectorXd c = domain.center();
  const int rank = twist_rank(twist_matrix(F, c));
  CommandResult res;
  res.report["surface"] = cfg.target;
  res.report["tau"] = tau;
  res.report["singular_nodes"] = static_cast<std::int64_t>(S.nodes.size());
  res.report["measure"] = S.measure;
  res.report["components"] = std::move(comps);
  res.report["twist_rank"] = rank;
  res.report["dimension_bound"] = singular_dim_bound(2, rank);
  res.headline = "singular " + cfg.target + ": " + std::to_string(S.components.size()) +
                 " components, " + std::to_string(S.nodes.size()) + " nodes";
  return res;
}

CommandResult cmd_trace(const RunConfig& cfg, const fs::path& out) {
  const DomainSpec domain = make_domain(cfg);
  const ClosedFormSurface s = catalog_surface(cfg.target);
  const PlanarSurface view = planar_view(s, domain);
  const double tau = cfg.solve.tau_sing > 0.0 ? cfg.solve.tau_sing : 1e-6;
  const auto seeds = cfg.trace_seeds.empty() ? default_seeds() : cfg.trace_seeds;
  TraceOutput t = trace_from(view, seeds, tau);

  std::ostringstream csv;
  write_polylines_csv(csv, t.rays);
  write_text(out / "rays.csv", csv.str());
  CommandResult res;
  res.report["surface"] = cfg.target;
  res.report["tau"] = tau;
  res.report["rays"] = std::move(t.report);
  res.headline = "trace " + cfg.target + ": " + std::to_string(t.rays.size()) + " of " +
                 std::to_string(seeds.size()) + " seeds traced";
  return res;
}

CommandResult cmd_rank(const RunConfig& cfg) {
  const VectorFieldSpec F = make_field(cfg);
  const int m = cfg.dim;
  std::vector<Eigen::VectorXd> points{Eigen::VectorXd::Zero(m)};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    Eigen::VectorXd x(m);
    for (int a = 0; a < m; ++a) x(a) = coord(rng);
    points.push_back(std::move(x));
  }
  json table = json::array();
  int bound = 0;
  for (const Eigen::VectorXd& x : points) {
    const int rank = twist_rank(twist_matrix(F, x));
    const int b = singular_dim_bound(m, rank);
    bound = std::max(bound, b);
    json row;
    row["x"] = vec(x);
    row["twist_rank"] = rank;
    row["dimension_bound"] = b;
    table.push_back(std::move(row));
  }
  const bool cond_e = check_theorem_e_condition(F, points);
  CommandResult res;
  res.report["field"] = cfg.field;
  res.report["dim"] = m;
  res.report["dimension_bound"] = bound;
  res.report["condition_e"] = cond_e;
  res.report["points"] = std::move(table);
  res.headline = "rank " + cfg.field + " m=" + std::to_string(m) + ": bound " +
                 std::to_string(bound) + ", condition E " + (cond_e ? "true" : "false");
  return res;
}

// ------------------------------------------------------------- invariants

struct Check {
  std::string name;
  double value;
  double limit;
  bool pass;
};

json check_json(const Check& c) {
  json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["limit"] = c.limit;
  j["pass"] = c.pass;
  return j;
}

Check at_most(std::string name, double value, double limit) {
  return {std::move(name), value, limit, std::isfinite(value) && value <= limit};
}

std::vector<Check> construction_checks() {
  const MinimizerConstruction c = construct_minimizer();
  std::vector<Check> out;
  double trace = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double th = 2.0 * kPi * k / 1000.0;
    trace = std::max(trace, std::abs(c.value({std::cos(th), std::sin(th)}) - boundary_rho(th)));
  }
  out.push_back(at_most("boundary_trace", trace, 1e-8));
  double lift = 0.0;
  for (const LiftedSegment& seg : c.segments(64, 16)) {
    lift = std::max(lift, segment_legendrian_defect(seg));
  }
  out.push_back(at_most("segment_legendrian_defect", lift, 1e-9));
  double sym = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = -1.0 + k / 100.0;
    const auto [t1, t2] = c.thetas(t);
    sym = std::max(sym, std::abs((t1 - c.theta_prime()) - (c.theta_prime() - t2)));
  }
  out.push_back(at_most("angle_symmetry", sym, 1e-12));
  const auto [a1, a2] = c.thetas(1.0);
  const auto [b1, b2] = c.thetas(-1.0);
  const double ends = std::max({std::abs(a1 - 5 * kPi / 8), std::abs(a2 - kPi / 8),
                                std::abs(b1 - 9 * kPi / 8), std::abs(b2 + 3 * kPi / 8)});
  out.push_back(at_most("endpoint_angles", ends, 1e-12));
  return out;
}

json run_item(const RunConfig& cfg, const std::string& target, bool& pass) {
  const DomainSpec domain = make_domain(cfg);
  const ClosedFormSurface s = catalog_surface(target);
  const VectorFieldSpec F = VectorFieldSpec::standard_contact(2);
  const ScalarFieldGrid u = s.sample(build_grid(domain, cfg.h));
  std::vector<Check> checks;
  json info;

  const Outcome expected = expected_outcome(target);
  VerdictOptions opts;
  opts.defect_tol = cfg.tol;
  const MinimizerVerdict v = minimizer_verdict(s, domain, cfg.h, opts);
  checks.push_back({"verdict", v.outcome == expected ? 0.0 : 1.0, 0.0, v.outcome == expected});
  info["verdict"] = json::parse(to_json(v));
  info["expected_verdict"] = to_string(expected);

  const double grid = p_area(u, F, CurvatureSpec::zero());
  info["grid_p_area"] = grid;
  if (is_unit_disc(domain)) {
    const double exact =
        target == "check-u" ? minimizer_p_area(construct_minimizer()) : closed_form_p_area(s);
    info["closed_form_p_area"] = exact;
    if (target == "pauls-u" || target == "pauls-v") {
      const double golden = 8.0 * std::numbers::sqrt2 / 3.0;
      checks.push_back(at_most("closed_form_p_area_golden", std::abs(exact - golden), 1e-4));
    }
  }

  // Residual of div N = 0 away from interfaces: reported, its decay under
  // refinement is an acceptance-level check.
  const ScalarFieldGrid r = pde_residual(u, F, CurvatureSpec::zero());
  double res_max = 0.0;
  const double h = u.spacing();
  for (Index i : u.interior_nodes()) {
    if (s.distance_to_interfaces(u.position(i)) < 5.0 * h) continue;
    bool full = true;
    const Eigen::VectorXi mi = u.multi_index(i);
    for (int dx = -1; dx <= 1 && full; ++dx) {
      for (int dy = -1; dy <= 1 && full; ++dy) {
        const Eigen::VectorXi nb = mi + Eigen::Vector2i(dx, dy);
        if ((nb.array() < 0).any() || (nb.array() >= u.shape().array()).any() ||
            !u.is_interior(u.linear_index(nb))) {
          full = false;
        }
      }
    }
    if (full) res_max = std::max(res_max, std::abs(r[i]));
  }
  info["pde_residual_away_from_interfaces"] = res_max;

  const PlanarSurface view = planar_view(s, domain);
  TraceOutput t = trace_from(view, default_seeds(), 1e-6);
  double straight = 0.0, lift = 0.0;
  int used = 0;
  for (const CharacteristicRay& ray : t.rays) {
    const CharacteristicRay part = clear_part(ray, s, 0.02);
    if (part.points.size() < 10) continue;
    ++used;
    straight = std::max(straight, chord_bend(part));
    lift = std::max(lift, legendrian_defect(part) / (part.end - part.start).norm());
  }
  info["rays_checked"] = used;
  checks.push_back(at_most("rays_traced", used == 0 ? 1.0 : 0.0, 0.0));
  checks.push_back(at_most("ray_straightness", straight, 1e-6));
  checks.push_back(at_most("ray_legendrian_defect", lift, 1e-8));

  if (target == "check-u") {
    for (Check& c : construction_checks()) checks.push_back(std::move(c));
  }

  json item;
  item["surface"] = target;
  json cj = json::array();
  bool ok = true;
  for (const Check& c : checks) {
    ok = ok && c.pass;
    cj.push_back(check_json(c));
  }
  item["pass"] = ok;
  item["checks"] = std::move(cj);
  item["info"] = std::move(info);
  pass = ok;
  return item;
}

const std::vector<std::string>& example_suite() {
  static const std::vector<std::string> items = {
      "7.1a:theta=pi/4",          "7.1b:theta=pi/3,eta=5*pi/3", "7.1b:theta=pi/3,eta=pi/2",
      "7.2",                      "pauls-u",                    "pauls-v",
      "check-u"};
  return items;
}

CommandResult cmd_examples(const RunConfig& cfg) {
  const std::vector<std::string> targets =
      cfg.target == "all" ? example_suite() : std::vector<std::string>{cfg.target};
  CommandResult res;
  json items = json::array();
  int failed = 0;
  for (const std::string& t : targets) {
    bool pass = false;
    items.push_back(run_item(cfg, t, pass));
    if (!pass) ++failed;
  }
  res.report["items"] = std::move(items);
  res.report["failed"] = failed;
  res.exit_code = failed == 0 ? kExitOk : kExitVerificationFailed;
  res.headline = "examples " + cfg.target + ": " + std::to_string(targets.size() - failed) +
                 " of " + std::to_string(targets.size()) + " passed";
  return res;
}

CommandResult dispatch(const RunConfig& cfg, const fs::path& out) {
  switch (cfg.command) {
    case Command::Solve: return cmd_solve(cfg, out);
    case Command::PArea: return cmd_parea(cfg);
    case Command::Verify: return cmd_verify(cfg);
    case Command::Singular: return cmd_singular(cfg, out);
    case Command::Trace: return cmd_trace(cfg, out);
    case Command::Examples: return cmd_examples(cfg);
    case Command::Rank: return cmd_rank(cfg);
  }
  throw ArgumentError("unknown command");
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(cfg.out_dir);
  CommandResult res;
  try {
    cfg.validate();
    fs::create_directories(out);
    res = dispatch(cfg, out);
  } catch (const std::exception& e) {
    res.exit_code = kExitError;
    res.report = json::object({{"error", e.what()}});
    res.headline = std::string(to_string(cfg.command)) + ": error: " + e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json summary;
  summary["command"] = to_string(cfg.command);
  summary["version"] = kVersion;
  summary["config"] = json::parse(to_json(cfg));
  summary["exit_code"] = res.exit_code;
  summary["report"] = std::move(res.report);
  summary["wall_time_s"] = wall;
  try {
    fs::create_directories(out);
    write_text(out / "summary.json", summary.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "cannot write summary: " << e.what() << '\n';
    return kExitError;
  }
  log << res.headline << '\n';
  return res.exit_code;
}

}  // namespace parea
