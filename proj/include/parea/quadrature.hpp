#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace parea {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  long evaluations = 0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Adaptive 7/15-point Gauss-Kronrod on [a, b] to absolute tolerance tol.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tol, int max_depth = 40);

/// Iterated adaptive quadrature over [a, b] x [c, d].
QuadResult integrate_box(const std::function<double(double, double)>& f, double a, double b,
                         double c, double d, double tol);

/// Integral of f over the disc |x - center| < radius in polar coordinates. The
/// angular range is split at the given breakpoints (kinks of f along rays).
QuadResult integrate_disc_polar(const std::function<double(const Eigen::Vector2d&)>& f,
                                const Eigen::Vector2d& center, double radius,
                                std::span<const double> angle_breaks, double tol);

}  // namespace parea
