#include "parea/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "parea/expression.hpp"
#include "parea/quadrature.hpp"

namespace parea {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Eigen::Vector2d unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

Interface segment(InterfaceKind kind, Eigen::Vector2d a, Eigen::Vector2d b, std::string label) {
  return {kind, std::move(a), std::move(b), std::move(label)};
}

}  // namespace

const char* to_string(InterfaceKind kind) {
  return kind == InterfaceKind::SingularCurve ? "singular-curve" : "kink";
}

double Interface::distance(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d d = b - a;
  const double s = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - a - s * d).norm();
}

double ClosedFormSurface::distance_to_interfaces(const Eigen::Vector2d& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& i : interfaces) best = std::min(best, i.distance(x));
  return best;
}

ScalarFieldGrid ClosedFormSurface::sample(const ScalarFieldGrid& like) const {
  if (like.dim() != 2) throw DimensionError("catalog surfaces are planar");
  return like.sampled([this](const Eigen::VectorXd& x) { return value(Eigen::Vector2d(x)); });
}

ClosedFormSurface example_7_1a(double theta) {
  if (!(theta > 0.0 && theta < kPi / 2)) throw ArgumentError("7.1a needs theta in (0, pi/2)");
  const double cot = 1.0 / std::tan(theta);
  ClosedFormSurface s;
  s.name = "7.1a";
  s.value = [cot](const Eigen::Vector2d& p) { return -p.x() * p.y() + p.y() * p.y() * cot; };
  s.grad = [cot](const Eigen::Vector2d& p) {
    return Eigen::Vector2d(-p.y(), -p.x() + 2.0 * p.y() * cot);
  };
  s.interfaces = {segment(InterfaceKind::SingularCurve, {-2, 0}, {2, 0}, "y=0")};
  s.angle_breaks = {0.0, kPi};
  return s;
}

ClosedFormSurface example_7_1b(double theta, double eta) {
  auto ok = [](double a) { return a > 0.0 && a < 2 * kPi && a != kPi; };
  if (!ok(theta) || !ok(eta)) throw ArgumentError("7.1b needs theta, eta in (0, 2pi) minus pi");
  const double cu = 1.0 / std::tan(theta);
  const double cl = 1.0 / std::tan(eta);
  ClosedFormSurface s;
  s.name = "7.1b";
  s.value = [cu, cl](const Eigen::Vector2d& p) {
    return -p.x() * p.y() + p.y() * p.y() * (p.y() > 0.0 ? cu : cl);
  };
  s.grad = [cu, cl](const Eigen::Vector2d& p) {
    return Eigen::Vector2d(-p.y(), -p.x() + 2.0 * p.y() * (p.y() > 0.0 ? cu : cl));
  };
  s.interfaces = {segment(InterfaceKind::SingularCurve, {-2, 0}, {2, 0}, "y=0")};
  s.angle_breaks = {0.0, kPi};
  return s;
}

ClosedFormSurface example_7_2() {
  ClosedFormSurface s;
  s.name = "7.2";
  s.value = [](const Eigen::Vector2d& p) { return p.y() > 0.0 ? p.x() * p.y() : 0.0; };
  s.grad = [](const Eigen::Vector2d& p) {
    return p.y() > 0.0 ? Eigen::Vector2d(p.y(), p.x()) : Eigen::Vector2d(0.0, 0.0);
  };
  s.interfaces = {segment(InterfaceKind::SingularCurve, {0, 0}, {0, 2}, "x=0,y>0"),
                  segment(InterfaceKind::Kink, {-2, 0}, {0, 0}, "y=0,x<0"),
                  segment(InterfaceKind::Kink, {0, 0}, {2, 0}, "y=0,x>0")};
  s.angle_breaks = {0.0, kPi / 2, kPi};
  return s;
}

ClosedFormSurface pauls_u() {
  ClosedFormSurface s;
  s.name = "pauls-u";
  s.value = [](const Eigen::Vector2d& p) { return p.x() * p.x() + p.x() * p.y(); };
  s.grad = [](const Eigen::Vector2d& p) { return Eigen::Vector2d(2 * p.x() + p.y(), p.x()); };
  s.interfaces = {segment(InterfaceKind::SingularCurve, {0, -2}, {0, 2}, "x=0")};
  s.angle_breaks = {kPi / 2, 3 * kPi / 2};
  return s;
}

ClosedFormSurface pauls_v() {
  ClosedFormSurface s;
  s.name = "pauls-v";
  s.value = [](const Eigen::Vector2d& p) { return p.x() * p.y() + 1.0 - p.y() * p.y(); };
  s.grad = [](const Eigen::Vector2d& p) { return Eigen::Vector2d(p.y(), p.x() - 2 * p.y()); };
  s.interfaces = {segment(InterfaceKind::SingularCurve, {-2, -2}, {2, 2}, "x=y")};
  s.angle_breaks = {kPi / 4, 5 * kPi / 4};
  return s;
}

double boundary_rho(double theta) {
  const double c = std::cos(theta);
  return c * c + c * std::sin(theta);
}

double boundary_rho_derivative(double theta) {
  return std::cos(2 * theta) - std::sin(2 * theta);
}

namespace {

// Legendrian segments from t e^{i theta'} at height rho(theta') reach the circle
// where cos(theta - theta') = k t. Only branches with sin(2 theta' + pi/4) = 0
// reduce to this form.
double branch_k(double theta_prime) {
  const double phase = 2 * theta_prime + kPi / 4;
  if (std::abs(std::sin(phase)) > 1e-12) {
    throw ArgumentError("unsupported singular-line angle; use 3pi/8 or 7pi/8");
  }
  return -1.0 / (std::sqrt(2.0) * std::cos(phase));
}

}  // namespace

std::pair<double, double> theta_from_t(double t, double theta_prime) {
  if (!(std::abs(t) <= 1.0)) throw ArgumentError("theta_from_t needs |t| <= 1");
  const double psi = std::acos(branch_k(theta_prime) * t);
  return {theta_prime + psi, theta_prime - psi};
}

std::pair<double, double> delta_eta(double t) {
  if (!(std::abs(t) <= 1.0)) throw ArgumentError("delta_eta needs |t| <= 1");
  const double delta = std::atan2(t * std::sqrt(1.0 - t * t / 2.0), 1.0 - t * t / std::sqrt(2.0));
  return {delta, kPi / 2 + theta_from_t(t).second - delta};
}

MinimizerConstruction::MinimizerConstruction(double theta_prime)
    : theta_prime_(theta_prime), gamma_(boundary_rho(theta_prime)), k_(branch_k(theta_prime)) {
  // Fans sit beyond the chords of the t = +-1 segments, which start on the circle.
  const auto [a1, a2] = thetas(1.0);
  fan_half_angle_ = std::abs(a1 - theta_prime) / 2;
  const double mid1 = theta_prime + (a1 - theta_prime) / 2;
  const double mid2 = theta_prime + (a2 - theta_prime) / 2;
  fan_axes_ = {mid2, mid1, mid2 + kPi, mid1 + kPi};
  for (double phi : fan_axes_) fan_q_.push_back(std::cos(2 * phi - kPi / 4) * std::sqrt(0.5));
}

std::pair<double, double> MinimizerConstruction::thetas(double t) const {
  const double psi = std::acos(std::clamp(k_ * t, -1.0, 1.0));
  return {theta_prime_ + psi, theta_prime_ - psi};
}

std::pair<double, double> MinimizerConstruction::theta_derivatives(double t) const {
  const double d = -k_ / std::sqrt(std::max(1e-300, 1.0 - k_ * k_ * t * t));
  return {d, -d};
}

Eigen::Vector2d MinimizerConstruction::anchor(double t) const { return t * unit(theta_prime_); }

namespace {

struct FamilyFrame {
  Eigen::Vector2d A, B, Ps, Pt;
  double zs, zt;
};

}  // namespace

MinimizerConstruction::Location MinimizerConstruction::locate(const Eigen::Vector2d& x_in) const {
  Eigen::Vector2d x = x_in;
  const double r = x.norm();
  if (r > 1.0) x /= r;

  Location loc;
  const double c_edge = std::cos(fan_half_angle_);
  for (int k = 0; k < static_cast<int>(fan_axes_.size()); ++k) {
    const Eigen::Vector2d a = unit(fan_axes_[k]);
    const double c = x.dot(a);
    if (c > c_edge) {
      loc.region = Region::Fan;
      loc.fan = k;
      loc.s = c;
      loc.t = x.dot(perp(a));
      return loc;
    }
  }

  const bool first = cross(unit(theta_prime_), x) >= 0.0;
  loc.region = first ? Region::Family1 : Region::Family2;
  auto endpoint = [&](double t) {
    const auto th = thetas(t);
    return unit(first ? th.first : th.second);
  };
  auto side = [&](double t) {
    const Eigen::Vector2d A = anchor(t);
    return cross(endpoint(t) - A, x - A);
  };
  double lo = -1.0, hi = 1.0;
  double flo = side(lo), fhi = side(hi);
  double t = 0.0;
  if (flo == 0.0) {
    t = lo;
  } else if (fhi == 0.0) {
    t = hi;
  } else if ((flo > 0) == (fhi > 0)) {
    t = std::abs(flo) < std::abs(fhi) ? lo : hi;
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = side(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    t = 0.5 * (lo + hi);
  }
  const Eigen::Vector2d A = anchor(t);
  const Eigen::Vector2d d = endpoint(t) - A;
  const double s = std::clamp((x - A).dot(d) / d.squaredNorm(), 0.0, 1.0);
  if ((A + s * d - x).norm() > 1e-8) {
    throw ConstructionError("point location failed: no ruled segment covers the point");
  }
  loc.s = s;
  loc.t = t;
  return loc;
}

namespace {

// Frame of the ruled parametrization P(s, t) = A(t) + s (B(t) - A(t)) with
// z(s, t) = gamma + s (rho(theta_j(t)) - gamma).
FamilyFrame family_frame(const MinimizerConstruction& c, bool first, double s, double t) {
  const auto th = c.thetas(t);
  const auto dth = c.theta_derivatives(t);
  const double theta = first ? th.first : th.second;
  const double dtheta = first ? dth.first : dth.second;
  FamilyFrame f;
  f.A = c.anchor(t);
  f.B = unit(theta);
  f.Ps = f.B - f.A;
  f.Pt = (1.0 - s) * unit(c.theta_prime()) + s * dtheta * perp(f.B);
  f.zs = boundary_rho(theta) - c.gamma();
  f.zt = s * boundary_rho_derivative(theta) * dtheta;
  return f;
}

Eigen::Vector2d family_gradient(const FamilyFrame& f) {
  Eigen::Matrix2d M;
  M.row(0) = f.Ps.transpose();
  M.row(1) = f.Pt.transpose();
  return M.partialPivLu().solve(Eigen::Vector2d(f.zs, f.zt));
}

}  // namespace

double MinimizerConstruction::value(const Eigen::Vector2d& x) const {
  const Location loc = locate(x);
  if (loc.region == Region::Fan) {
    const double c = loc.s;
    return 0.5 + fan_q_[loc.fan] * (2 * c * c - 1) - c * loc.t;
  }
  const auto th = thetas(loc.t);
  const double theta = loc.region == Region::Family1 ? th.first : th.second;
  return gamma_ + loc.s * (boundary_rho(theta) - gamma_);
}

Eigen::Vector2d MinimizerConstruction::gradient(const Eigen::Vector2d& x) const {
  const Location loc = locate(x);
  if (loc.region == Region::Fan) {
    // u = 1/2 + q (2c^2 - 1) - c w with c = x.a, w = x.a_perp.
    const Eigen::Vector2d a = unit(fan_axes_[loc.fan]);
    const double c = loc.s;
    return (4 * fan_q_[loc.fan] * c - loc.t) * a - c * perp(a);
  }
  return family_gradient(family_frame(*this, loc.region == Region::Family1, loc.s, loc.t));
}

std::vector<LiftedSegment> MinimizerConstruction::segments(int per_family, int per_fan) const {
  std::vector<LiftedSegment> out;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < per_family; ++k) {
      const double t = per_family == 1 ? 0.0 : -1.0 + 2.0 * k / (per_family - 1);
      const auto th = thetas(t);
      const double theta = j == 0 ? th.first : th.second;
      out.push_back({anchor(t), unit(theta), gamma_, boundary_rho(theta)});
    }
  }
  for (double phi : fan_axes_) {
    for (int k = 0; k < per_fan; ++k) {
      const double beta = fan_half_angle_ * (k + 0.5) / per_fan;
      out.push_back({unit(phi - beta), unit(phi + beta), boundary_rho(phi - beta),
                     boundary_rho(phi + beta)});
    }
  }
  out.push_back({anchor(-1.0), anchor(1.0), gamma_, gamma_});
  return out;
}

ClosedFormSurface MinimizerConstruction::surface() const {
  auto self = std::make_shared<const MinimizerConstruction>(*this);
  ClosedFormSurface s;
  s.name = "check-u";
  s.value = [self](const Eigen::Vector2d& x) { return self->value(x); };
  s.grad = [self](const Eigen::Vector2d& x) { return self->gradient(x); };
  s.interfaces = {segment(InterfaceKind::SingularCurve, anchor(-1.0), anchor(1.0), "L")};
  s.angle_breaks = {theta_prime_, theta_prime_ + kPi};
  for (double phi : fan_axes_) {
    s.angle_breaks.push_back(phi - fan_half_angle_);
    s.angle_breaks.push_back(phi + fan_half_angle_);
  }
  return s;
}

namespace {

bool segments_cross(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                    const Eigen::Vector2d& q2) {
  const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return d1 * d2 < -1e-24 && d3 * d4 < -1e-24;
}

// Partner angle b of a on a Legendrian chord with linear height: the nontrivial
// zero of [rho(b) - rho(a) + sin(b - a)] / sin(b - a) on [lo, hi].
std::optional<double> chord_partner(double a, double lo, double hi) {
  auto g = [a](double b) {
    return (boundary_rho(b) - boundary_rho(a)) / std::sin(b - a) + 1.0;
  };
  constexpr int kScan = 400;
  double prev_b = lo, prev_g = std::abs(lo - a) < 1e-7 ? NAN : g(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double b = lo + (hi - lo) * i / kScan;
    const double gb = std::abs(b - a) < 1e-7 ? NAN : g(b);
    if (!std::isnan(prev_g) && !std::isnan(gb) && (prev_g > 0) != (gb > 0)) {
      double l = prev_b, r = b, gl = prev_g;
      for (int it = 0; it < 200 && r - l > 1e-15; ++it) {
        const double m = 0.5 * (l + r);
        const double gm = g(m);
        if ((gm > 0) == (gl > 0)) {
          l = m;
          gl = gm;
        } else {
          r = m;
        }
      }
      return 0.5 * (l + r);
    }
    prev_b = b;
    prev_g = gb;
  }
  return std::nullopt;
}

}  // namespace

MinimizerConstruction construct_minimizer(double theta_prime) {
  MinimizerConstruction c(theta_prime);

  // The ruled families must sweep their half-discs without overlap.
  constexpr int kSweep = 400;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < kSweep; ++i) {
      for (int gap : {1, 7}) {
        if (i + gap > kSweep) continue;
        const double t0 = -1.0 + 2.0 * i / kSweep, t1 = -1.0 + 2.0 * (i + gap) / kSweep;
        const auto th0 = c.thetas(t0), th1 = c.thetas(t1);
        const Eigen::Vector2d b0 = unit(j == 0 ? th0.first : th0.second);
        const Eigen::Vector2d b1 = unit(j == 0 ? th1.first : th1.second);
        if (segments_cross(c.anchor(t0), b0, c.anchor(t1), b1)) {
          throw ConstructionError("ruled segments cross; no graph over the disc on this branch");
        }
      }
    }
  }

  // Each fan is filled by chords joining boundary points related by the t = 1
  // chord condition. Solve for the partner numerically and confirm the chords
  // are parallel, with the critical (degenerate-chord) angle at the fan axis.
  for (double axis : c.fan_axes()) {
    const double lo = axis - c.fan_half_angle();
    const double hi = axis + c.fan_half_angle();
    constexpr int kSamples = 24;
    double prev_gap = NAN, prev_a = NAN, critical = NAN;
    for (int i = 0; i <= kSamples; ++i) {
      const double a = lo + (hi - lo) * (i + 0.3) / (kSamples + 1);
      const auto b = chord_partner(a, lo - 1e-9, hi + 1e-9);
      if (!b) throw ConstructionError("fan chord has no Legendrian partner");
      if (std::abs(0.5 * (a + *b) - axis) > 1e-9) {
        throw ConstructionError("fan chords are not parallel to the fan boundary chord");
      }
      const double gap = *b - a;
      if (!std::isnan(prev_gap) && (gap > 0) != (prev_gap > 0)) {
        critical = 0.5 * (prev_a + a);
      }
      prev_gap = gap;
      prev_a = a;
    }
    if (std::isnan(critical) || std::abs(critical - axis) > 2 * c.fan_half_angle() / kSamples) {
      throw ConstructionError("fan critical angle not found at the fan axis");
    }
  }

  // Heights must be continuous where the families meet the fans, and the
  // boundary trace must be rho.
  for (int i = 0; i < 64; ++i) {
    const double th = 2 * kPi * (i + 0.37) / 64;
    if (std::abs(c.value(unit(th)) - boundary_rho(th)) > 1e-8) {
      throw ConstructionError("boundary trace deviates from rho");
    }
  }
  return c;
}

double minimizer_p_area(const MinimizerConstruction& c, double tol) {
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    const bool first = j == 0;
    auto f = [&](double t, double s) {
      const FamilyFrame fr = family_frame(c, first, s, t);
      const Eigen::Vector2d P = fr.A + s * fr.Ps;
      const Eigen::Vector2d g = family_gradient(fr) + perp(P);
      return g.norm() * std::abs(cross(fr.Ps, fr.Pt));
    };
    total += integrate_box(f, -1.0, 1.0, 0.0, 1.0, tol / 6).value;
  }
  for (int k = 0; k < static_cast<int>(c.fan_axes().size()); ++k) {
    const double phi = c.fan_axes()[k];
    const Eigen::Vector2d a = unit(phi);
    auto f = [&](double beta, double v) {
      const double cc = std::cos(beta), sb = std::sin(beta);
      const double w = sb * v;
      const Eigen::Vector2d P = cc * a + w * perp(a);
      const Eigen::Vector2d g = c.gradient(P) + perp(P);
      return g.norm() * sb * sb;
    };
    total += integrate_box(f, 0.0, c.fan_half_angle(), -1.0, 1.0, tol / 6).value;
  }
  return total;
}

double closed_form_p_area(const ClosedFormSurface& s, double tol) {
  auto f = [&](const Eigen::Vector2d& x) { return s.grad_plus_field(x).norm(); };
  return integrate_disc_polar(f, Eigen::Vector2d::Zero(), 1.0, s.angle_breaks, tol).value;
}

double segment_legendrian_defect(const LiftedSegment& seg) {
  // Along P(r) = p0 + r (p1 - p0): du + x dy - y dx = [(z1 - z0) + cross(P, p1 - p0)] dr,
  // integrated with the midpoint rule on 32 panels.
  constexpr int kPanels = 32;
  const Eigen::Vector2d d = seg.p1 - seg.p0;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const Eigen::Vector2d P = seg.p0 + (i + 0.5) / kPanels * d;
    total += std::abs((seg.z1 - seg.z0) + cross(P, d)) / kPanels;
  }
  return total;
}

namespace {

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("catalog parameter '" + item + "' needs '='");
    out[item.substr(0, eq)] = parse_constant(item.substr(eq + 1));
    pos = comma + 1;
  }
  return out;
}

double require(const std::map<std::string, double>& p, const std::string& key,
               const std::string& name) {
  const auto it = p.find(key);
  if (it == p.end()) throw ArgumentError("catalog entry " + name + " needs " + key + "=...");
  return it->second;
}

}  // namespace

ClosedFormSurface catalog_surface(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const auto params =
      colon == std::string::npos ? std::map<std::string, double>{} : parse_params(spec.substr(colon + 1));
  if (name == "7.1a") return example_7_1a(require(params, "theta", name));
  if (name == "7.1b") {
    return example_7_1b(require(params, "theta", name), require(params, "eta", name));
  }
  if (name == "7.2") return example_7_2();
  if (name == "pauls-u") return pauls_u();
  if (name == "pauls-v") return pauls_v();
  if (name == "check-u") {
    static const ClosedFormSurface cached = construct_minimizer().surface();
    return cached;
  }
  throw ArgumentError("unknown catalog surface '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"7.1a:theta=...", "7.1b:theta=...,eta=...", "7.2", "pauls-u", "pauls-v", "check-u"};
}

}  // namespace parea
