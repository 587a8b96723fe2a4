#pragma once

#include <functional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "parea/error.hpp"

namespace parea {

using Point = Eigen::VectorXd;

enum class FieldKind { StandardContact, GradientPlusLinear, Zero, Custom };

std::string to_string(FieldKind kind);

/// Perturbation field F on R^m entering |grad u + F|.
///
/// The Jacobian layout is the usual one: jacobian(x)(I, J) = dF_I/dx_J.
/// Instances are immutable after construction and may be shared freely.
class VectorFieldSpec {
 public:
  using ValueFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  /// F = -X* on R^{2n}; for m = 2 this is F(x, y) = (-y, x).
  static VectorFieldSpec standard_contact(int m);
  static VectorFieldSpec zero(int m);
  /// F_I = d_I g + 1/2 sum_K C_IK x_K. C must be exactly skew.
  static VectorFieldSpec gradient_plus_linear(int m, ValueFn grad_g, JacobianFn hess_g,
                                              Eigen::MatrixXd C);
  static VectorFieldSpec custom(int m, ValueFn value, JacobianFn jacobian);

  int dim() const noexcept { return dim_; }
  FieldKind kind() const noexcept { return kind_; }

  Eigen::VectorXd value(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  /// The constant skew matrix C of a GradientPlusLinear field (zero otherwise).
  const Eigen::MatrixXd& skew_part() const noexcept { return skew_; }

 private:
  VectorFieldSpec(int dim, FieldKind kind, ValueFn value, JacobianFn jacobian,
                  Eigen::MatrixXd skew);

  int dim_;
  FieldKind kind_;
  ValueFn value_;
  JacobianFn jacobian_;
  Eigen::MatrixXd skew_;
};

/// Prescribed curvature H with a sup-norm estimate on the working domain.
struct CurvatureSpec {
  std::function<double(const Eigen::VectorXd&)> H;
  double bound = 0.0;

  static CurvatureSpec zero();
  static CurvatureSpec constant(double value);

  double operator()(const Eigen::VectorXd& x) const { return H ? H(x) : 0.0; }
  bool is_zero() const noexcept { return !H; }
};

/// h_JI = d_J F_I - d_I F_J at one point; entries(J, I) holds h_JI.
struct TwistMatrix {
  Eigen::MatrixXd entries;
  double rank_tolerance = 1e-9;
};

/// (g1, g2, g3, g4, ...) -> (g2, -g1, g4, -g3, ...).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> star(
    const Eigen::MatrixBase<Derived>& v) {
  if (v.size() % 2 != 0) {
    throw DimensionError("star: odd length " + std::to_string(v.size()));
  }
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(v.size());
  for (Eigen::Index k = 0; k < v.size(); k += 2) {
    out(k) = v(k + 1);
    out(k + 1) = -v(k);
  }
  return out;
}

TwistMatrix twist_matrix(const VectorFieldSpec& spec, const Eigen::VectorXd& x);

/// Numerical rank: singular values above rank_tolerance * sigma_max.
int twist_rank(const TwistMatrix& tm);

/// m - floor((rank + 1) / 2): upper bound for the dimension of S(u) near x.
int singular_dim_bound(const VectorFieldSpec& spec, const Eigen::VectorXd& x);
int singular_dim_bound(int m, int rank);

/// True iff floor((rank + 1) / 2) >= 2 at every sample point.
bool check_theorem_e_condition(const VectorFieldSpec& spec,
                               std::span<const Eigen::VectorXd> sample_points);

/// div of the starred field F*, from the Jacobian. Requires even m.
double div_F_star(const VectorFieldSpec& spec, const Eigen::VectorXd& x);

/// Largest spectral norm of the Jacobian over the given points.
double jacobian_norm_estimate(const VectorFieldSpec& spec,
                              std::span<const Eigen::VectorXd> points);

}  // namespace parea
