#include "parea/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "parea/error.hpp"

namespace parea {

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw ArgumentError("Gauss-Legendre order must be positive");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes(i) = -x;
    nodes(n - 1 - i) = x;
    weights(i) = weights(n - 1 - i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

// Kronrod 15 abscissae (positive half) and weights, with the embedded Gauss 7 weights.
constexpr double kXk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.0};
constexpr double kWk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double value;
  double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b, long& evals) {
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  const double fc = f(c);
  double k = kWk[7] * fc;
  double g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double s = f(c - r * kXk[j]) + f(c + r * kXk[j]);
    k += kWk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  evals += 15;
  return {k * r, std::abs((k - g) * r)};
}

void adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth,
           Panel whole, QuadResult& out) {
  if (whole.error <= tol || depth <= 0 || b - a < 1e-14 * (1.0 + std::abs(a))) {
    out.value += whole.value;
    out.error += whole.error;
    return;
  }
  const double m = 0.5 * (a + b);
  const Panel left = gk15(f, a, m, out.evaluations);
  const Panel right = gk15(f, m, b, out.evaluations);
  adapt(f, a, m, 0.5 * tol, depth - 1, left, out);
  adapt(f, m, b, 0.5 * tol, depth - 1, right, out);
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tol, int max_depth) {
  if (!(tol > 0.0)) throw ArgumentError("quadrature tolerance must be positive");
  QuadResult out;
  if (a == b) return out;
  const Panel whole = gk15(f, a, b, out.evaluations);
  adapt(f, a, b, tol, max_depth, whole, out);
  return out;
}

QuadResult integrate_box(const std::function<double(double, double)>& f, double a, double b,
                         double c, double d, double tol) {
  QuadResult total;
  const double inner_tol = 0.1 * tol / std::max(1e-300, std::abs(b - a));
  auto outer = [&](double x) {
    const QuadResult in = integrate_adaptive([&](double y) { return f(x, y); }, c, d, inner_tol);
    total.evaluations += in.evaluations;
    return in.value;
  };
  const QuadResult res = integrate_adaptive(outer, a, b, 0.9 * tol);
  total.value = res.value;
  total.error = res.error + 0.1 * tol;
  return total;
}

QuadResult integrate_disc_polar(const std::function<double(const Eigen::Vector2d&)>& f,
                                const Eigen::Vector2d& center, double radius,
                                std::span<const double> angle_breaks, double tol) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> cuts;
  for (double t : angle_breaks) {
    double w = std::fmod(t, two_pi);
    if (w < 0.0) w += two_pi;
    cuts.push_back(w);
  }
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-14; }),
             cuts.end());
  cuts.push_back(two_pi);

  auto integrand = [&](double theta, double r) {
    const Eigen::Vector2d x = center + r * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    return f(x) * r;
  };
  QuadResult total;
  const double piece_tol = tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const QuadResult q = integrate_box(integrand, cuts[k], cuts[k + 1], 0.0, radius, piece_tol);
    total.value += q.value;
    total.error += q.error;
    total.evaluations += q.evaluations;
  }
  return total;
}

}  // namespace parea
