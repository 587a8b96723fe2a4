#include "parea/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>

namespace parea {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Eigen::Vector2d rotate_cw(const Eigen::Vector2d& n) { return {n.y(), -n.x()}; }

}  // namespace

PlanarSurface planar_view(const ClosedFormSurface& s, const DomainSpec& domain) {
  if (domain.dim() != 2) throw DimensionError("closed-form surfaces live on planar domains");
  PlanarSurface v;
  v.value = s.value;
  v.grad_plus_field = [g = s.grad](const Eigen::Vector2d& x) -> std::optional<Eigen::Vector2d> {
    return g(x) + Eigen::Vector2d(-x.y(), x.x());
  };
  v.inside = [domain](const Eigen::Vector2d& x) { return domain.contains(x); };
  v.resolution = 1e-3;
  return v;
}

PlanarSurface planar_view(const ScalarFieldGrid& u_in, const VectorFieldSpec& F) {
  if (u_in.dim() != 2 || F.dim() != 2) throw DimensionError("planar view needs a 2-D grid");
  auto u = std::make_shared<const ScalarFieldGrid>(u_in);
  // Cell containing x, with bilinear weights; nothing if x leaves the lattice.
  struct Cell {
    Index nodes[4];
    double w[4];
  };
  auto cell = [u](const Eigen::Vector2d& x) -> std::optional<Cell> {
    const double h = u->spacing();
    const Eigen::Vector2d q = (x - u->origin()) / h;
    const int i = static_cast<int>(std::floor(q.x()));
    const int j = static_cast<int>(std::floor(q.y()));
    if (i < 0 || j < 0 || i + 1 >= u->shape()(0) || j + 1 >= u->shape()(1)) return std::nullopt;
    const double fx = q.x() - i, fy = q.y() - j;
    Cell c;
    int k = 0;
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di, ++k) {
        c.nodes[k] = u->linear_index(Eigen::Vector2i(i + di, j + dj));
        c.w[k] = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy);
      }
    }
    return c;
  };
  PlanarSurface v;
  v.value = [u, cell](const Eigen::Vector2d& x) {
    const auto c = cell(x);
    if (!c) throw ArgumentError("point outside the grid");
    double z = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (!u->is_active(c->nodes[k])) throw ArgumentError("point outside the active grid");
      z += c->w[k] * (*u)[c->nodes[k]];
    }
    return z;
  };
  v.grad_plus_field = [u, cell, F](const Eigen::Vector2d& x) -> std::optional<Eigen::Vector2d> {
    const auto c = cell(x);
    if (!c) return std::nullopt;
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int k = 0; k < 4; ++k) {
      if (!u->is_interior(c->nodes[k])) return std::nullopt;
      g += c->w[k] * grad_u(*u, c->nodes[k]);
    }
    return g + F.value(x);
  };
  v.inside = [u, cell](const Eigen::Vector2d& x) {
    if (!u->domain().contains(x)) return false;
    const auto c = cell(x);
    if (!c) return false;
    for (Index n : c->nodes) {
      if (!u->is_interior(n)) return false;
    }
    return true;
  };
  v.resolution = u->spacing();
  return v;
}

std::optional<Eigen::Vector2d> characteristic_direction(const PlanarSurface& s,
                                                        const Eigen::Vector2d& x, double tau) {
  const auto g = s.grad_plus_field(x);
  if (!g) return std::nullopt;
  const double n = g->norm();
  if (n < tau || n == 0.0) return std::nullopt;
  return rotate_cw(*g / n);
}

std::optional<Eigen::Vector2d> characteristic_direction(const ScalarFieldGrid& u,
                                                        const VectorFieldSpec& F, Index node,
                                                        double tau) {
  if (u.dim() != 2) throw DimensionError("characteristic directions are planar");
  const auto N = legendrian_normal(u, F, node, tau);
  if (!N) return std::nullopt;
  return rotate_cw(Eigen::Vector2d(*N));
}

CharacteristicRay trace_ray(const PlanarSurface& s, const Eigen::Vector2d& x0, double tau,
                            double step, double max_length) {
  if (!s.inside(x0)) throw ArgumentError("ray seed outside the domain");
  const auto d0 = characteristic_direction(s, x0, tau);
  if (!d0) throw SingularityError("ray seed lies on the singular set");
  if (step <= 0.0) step = 0.5 * s.resolution;

  // Midpoint-rule march along N-perp. N itself never reverses along a
  // characteristic, so a reversal means the step jumped over the singular set.
  auto march = [&](double sign) {
    std::vector<Eigen::Vector2d> out;
    Eigen::Vector2d x = x0;
    Eigen::Vector2d dir = sign * *d0;
    const int max_steps = static_cast<int>(max_length / step);
    for (int k = 0; k < max_steps; ++k) {
      const Eigen::Vector2d xm = x + 0.5 * step * dir;
      if (!s.inside(xm)) break;
      const auto dm = characteristic_direction(s, xm, tau);
      if (!dm || sign * dm->dot(dir) <= 0) break;
      const Eigen::Vector2d xn = x + step * sign * *dm;
      if (!s.inside(xn)) break;
      const auto dn = characteristic_direction(s, xn, tau);
      if (!dn || sign * dn->dot(dir) <= 0) break;
      x = xn;
      dir = sign * *dn;
      out.push_back(x);
    }
    return out;
  };
  const auto fwd = march(1.0);
  const auto bwd = march(-1.0);

  CharacteristicRay ray;
  ray.base = x0;
  ray.points.assign(bwd.rbegin(), bwd.rend());
  ray.points.push_back(x0);
  ray.points.insert(ray.points.end(), fwd.begin(), fwd.end());
  ray.start = ray.points.front();
  ray.end = ray.points.back();

  if (ray.points.size() >= 3) {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : ray.points) mean += p;
    mean /= static_cast<double>(ray.points.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : ray.points) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    ray.direction = eig.eigenvectors().col(1);
  } else {
    ray.direction = *d0;
  }
  if (ray.direction.dot(*d0) < 0) ray.direction = -ray.direction;

  for (const auto& p : ray.points) {
    const auto d = characteristic_direction(s, p, tau);
    if (d) {
      const double angle = std::atan2(std::abs(cross(*d, ray.direction)),
                                      std::abs(d->dot(ray.direction)));
      ray.straightness = std::max(ray.straightness, angle);
    }
    ray.heights.push_back(s.value(p));
  }
  ray.lift_slope = -cross(x0, ray.direction);
  return ray;
}

double jump_defect(const InterfaceSample& s) {
  if (!s.n_plus || !s.n_minus) throw ArgumentError("jump defect needs both one-sided normals");
  return (*s.n_plus - *s.n_minus).dot(s.normal_plus);
}

std::optional<Eigen::Vector2d> one_sided_normal(const PlanarSurface& s, const Eigen::Vector2d& p,
                                                const Eigen::Vector2d& nu, double delta) {
  Eigen::Vector2d N[3];
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector2d x = p + (k + 1) * delta * nu;
    if (!s.inside(x)) return std::nullopt;
    const auto g = s.grad_plus_field(x);
    if (!g || g->norm() == 0.0) return std::nullopt;
    N[k] = g->normalized();
  }
  const Eigen::Vector2d n0 = 3 * N[0] - 3 * N[1] + N[2];
  if (n0.norm() == 0.0) return std::nullopt;
  return n0.normalized();
}

InterfaceSample sample_interface(const PlanarSurface& s, const Interface& iface,
                                 const Eigen::Vector2d& p, double delta) {
  InterfaceSample out;
  out.point = p;
  out.tangent = iface.tangent();
  out.normal_plus = iface.normal_plus();
  out.kind = iface.kind;
  out.label = iface.label;
  out.n_plus = one_sided_normal(s, p, out.normal_plus, delta);
  out.n_minus = one_sided_normal(s, p, -out.normal_plus, delta);
  return out;
}

AngleReport angle_criterion(const InterfaceSample& s, const CharacteristicRay& ray_in,
                            const CharacteristicRay& ray_out, double angle_tol) {
  auto away = [&](const CharacteristicRay& r) {
    const double side = (r.base - s.point).dot(s.normal_plus);
    Eigen::Vector2d d = r.direction;
    if (d.dot(s.normal_plus) * side < 0) d = -d;
    return d;
  };
  const double in_side = (ray_in.base - s.point).dot(s.normal_plus);
  const double out_side = (ray_out.base - s.point).dot(s.normal_plus);
  if (in_side * out_side >= 0) throw ArgumentError("angle criterion needs rays on opposite sides");
  AngleReport r;
  r.incident = std::acos(std::clamp(s.tangent.dot(away(ray_in)), -1.0, 1.0));
  r.reflected = std::acos(std::clamp(s.tangent.dot(away(ray_out)), -1.0, 1.0));
  r.pass = std::abs(r.incident - r.reflected) <= angle_tol;
  return r;
}

double legendrian_defect(const CharacteristicRay& ray) {
  if (ray.points.size() != ray.heights.size()) throw ArgumentError("ray lift is incomplete");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < ray.points.size(); ++k) {
    // Theta = dz + x dy - y dx on a straight piece: dz + cross(P_k, P_{k+1}).
    total += std::abs(ray.heights[k + 1] - ray.heights[k] +
                      cross(ray.points[k], ray.points[k + 1]));
  }
  return total;
}

double loop_obstruction(std::span<const Eigen::Vector2d> loop) {
  if (loop.size() < 3) return 0.0;
  double twice_area = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    twice_area += cross(loop[k], loop[(k + 1) % loop.size()]);
  }
  return twice_area;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Minimizer: return "Minimizer";
    case Outcome::NotMinimizer: return "NotMinimizer";
    case Outcome::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_json(const MinimizerVerdict& v) {
  char buf[256];
  std::string out = "{\"outcome\":\"";
  out += to_string(v.outcome);
  out += "\",\"route\":\"" + v.route + "\"";
  std::snprintf(buf, sizeof buf, ",\"defect_tol\":%.17g,\"max_defect\":%.17g,\"samples\":%d",
                v.defect_tol, v.max_defect, v.samples);
  out += buf;
  if (v.witness) {
    const auto& w = *v.witness;
    std::snprintf(buf, sizeof buf,
                  ",\"witness\":{\"x\":%.17g,\"y\":%.17g,\"defect\":%.17g,\"kind\":\"%s\",",
                  w.point.x(), w.point.y(), v.witness_defect, to_string(w.kind));
    out += buf;
    out += "\"interface\":\"" + w.label + "\"}";
  }
  out += "}";
  return out;
}

namespace {

MinimizerVerdict jump_route(const PlanarSurface& s, const std::vector<Interface>& interfaces,
                            const DomainSpec& domain, double delta, const VerdictOptions& opts,
                            double defect_tol) {
  MinimizerVerdict v;
  v.route = "jump-condition";
  v.defect_tol = defect_tol;
  int undetermined = 0;
  for (const auto& iface : interfaces) {
    const double len = (iface.b - iface.a).norm();
    for (int k = 0; k <= opts.samples_per_interface; ++k) {
      const Eigen::Vector2d p =
          iface.a + (static_cast<double>(k) / opts.samples_per_interface) * (iface.b - iface.a);
      const double r = static_cast<double>(k) / opts.samples_per_interface * len;
      if (r < opts.endpoint_skip || len - r < opts.endpoint_skip) continue;
      if (!domain.contains(p, 3.5 * delta + opts.endpoint_skip)) continue;
      const InterfaceSample sample = sample_interface(s, iface, p, delta);
      if (!sample.n_plus || !sample.n_minus) {
        ++undetermined;
        continue;
      }
      const double d = jump_defect(sample);
      ++v.samples;
      v.max_defect = std::max(v.max_defect, std::abs(d));
      if (std::abs(d) > defect_tol && (!v.witness || std::abs(d) > std::abs(v.witness_defect))) {
        v.witness = sample;
        v.witness_defect = d;
      }
    }
  }
  if (v.witness) {
    v.outcome = Outcome::NotMinimizer;
    v.route = "violation witness";
  } else if (v.samples > 0 && undetermined == 0) {
    v.outcome = Outcome::Minimizer;
  } else {
    v.outcome = Outcome::Inconclusive;
  }
  return v;
}

}  // namespace

namespace {

// A band around an isolated singular point is a blob; a band around a curve
// is long compared with its width.
bool curve_like(const ScalarFieldGrid& u, const SingularComponent& c) {
  if (c.nodes.size() <= 3 || c.direction.size() != 2) return false;
  const Eigen::Vector2d dir = c.direction;
  double lo = 0.0, hi = 0.0, across = 0.0;
  for (Index n : c.nodes) {
    const Eigen::Vector2d d = u.position(n) - c.centroid;
    lo = std::min(lo, d.dot(dir));
    hi = std::max(hi, d.dot(dir));
    across = std::max(across, std::abs(cross(dir, d)));
  }
  return hi - lo >= 4.0 * (2.0 * across + u.spacing());
}

}  // namespace

std::vector<Interface> fitted_interfaces(const ScalarFieldGrid& u, const SingularSet& S) {
  std::vector<Interface> out;
  if (u.dim() != 2) return out;
  int id = 0;
  for (const auto& c : S.components) {
    ++id;
    if (!curve_like(u, c)) continue;
    const Eigen::Vector2d dir = c.direction;
    double lo = 0.0, hi = 0.0;
    for (Index n : c.nodes) {
      const double s = (u.position(n) - c.centroid).dot(dir);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const Eigen::Vector2d centroid = c.centroid;
    out.push_back({InterfaceKind::SingularCurve, centroid + (lo - u.spacing()) * dir,
                   centroid + (hi + u.spacing()) * dir, "fitted-" + std::to_string(id)});
  }
  return out;
}

MinimizerVerdict minimizer_verdict(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                                   const CurvatureSpec& H, double tau,
                                   const std::vector<Interface>* interfaces,
                                   VerdictOptions opts) {
  (void)H;
  const double h = u.spacing();
  const double tol = opts.defect_tol >= 0.0 ? opts.defect_tol : 10 * h + 1e-6;
  const SingularSet S = singular_set(u, F, tau);
  if (!interfaces) {
    const bool point_like =
        std::none_of(S.components.begin(), S.components.end(),
                     [&](const SingularComponent& c) { return curve_like(u, c); });
    if (point_like) {
      MinimizerVerdict v;
      v.outcome = Outcome::Minimizer;
      v.route = "H_{m-1}(S)=0";
      v.defect_tol = tol;
      return v;
    }
  }
  if (u.dim() != 2) {
    MinimizerVerdict v;
    v.route = "unsupported dimension for interface sampling";
    v.defect_tol = tol;
    return v;
  }
  const std::vector<Interface> fitted = interfaces ? *interfaces : fitted_interfaces(u, S);
  const double delta = opts.delta > 0.0 ? opts.delta : 2.5 * h;
  return jump_route(planar_view(u, F), fitted, u.domain(), delta, opts, tol);
}

MinimizerVerdict minimizer_verdict(const ClosedFormSurface& s, const DomainSpec& domain, double h,
                                   VerdictOptions opts) {
  const double tol = opts.defect_tol >= 0.0 ? opts.defect_tol : 10 * h + 1e-6;
  if (s.interfaces.empty()) {
    opts.defect_tol = tol;
    const ScalarFieldGrid g = s.sample(build_grid(domain, h));
    const VectorFieldSpec F = VectorFieldSpec::standard_contact(2);
    return minimizer_verdict(g, F, CurvatureSpec::zero(), default_singular_threshold(g, F),
                             nullptr, opts);
  }
  const double delta = opts.delta > 0.0 ? opts.delta : 1e-4;
  return jump_route(planar_view(s, domain), s.interfaces, domain, delta, opts, tol);
}

void write_polylines_csv(std::ostream& os,
                         const std::vector<std::vector<Eigen::Vector2d>>& lines) {
  char buf[96];
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (k > 0) os << '\n';
    for (const auto& p : lines[k]) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x(), p.y());
      os << buf;
    }
  }
}

void write_polylines_csv(std::ostream& os, const std::vector<CharacteristicRay>& rays) {
  char buf[128];
  for (std::size_t k = 0; k < rays.size(); ++k) {
    if (k > 0) os << '\n';
    const auto& r = rays[k];
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.points[i].x(), r.points[i].y(),
                    r.heights[i]);
      os << buf;
    }
  }
}

}  // namespace parea
