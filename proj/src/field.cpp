#include "parea/field.hpp"

#include <cmath>

namespace parea {

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::StandardContact: return "standard-contact";
    case FieldKind::GradientPlusLinear: return "gradient-plus-linear";
    case FieldKind::Zero: return "zero";
    case FieldKind::Custom: return "custom";
  }
  return "unknown";
}

VectorFieldSpec::VectorFieldSpec(int dim, FieldKind kind, ValueFn value, JacobianFn jacobian,
                                 Eigen::MatrixXd skew)
    : dim_(dim),
      kind_(kind),
      value_(std::move(value)),
      jacobian_(std::move(jacobian)),
      skew_(std::move(skew)) {}

namespace {

void require_positive_dim(int m) {
  if (m <= 0) throw DimensionError("field dimension must be positive, got " + std::to_string(m));
}

Eigen::MatrixXd standard_contact_jacobian(int m) {
  // F_{2k} = -x_{2k+1}, F_{2k+1} = x_{2k} (0-based pairs).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; k += 2) {
    J(k, k + 1) = -1.0;
    J(k + 1, k) = 1.0;
  }
  return J;
}

}  // namespace

VectorFieldSpec VectorFieldSpec::standard_contact(int m) {
  require_positive_dim(m);
  if (m % 2 != 0) throw DimensionError("standard contact field needs even dimension");
  Eigen::MatrixXd J = standard_contact_jacobian(m);
  return VectorFieldSpec(
      m, FieldKind::StandardContact,
      [J](const Eigen::VectorXd& x) -> Eigen::VectorXd { return J * x; },
      [J](const Eigen::VectorXd&) -> Eigen::MatrixXd { return J; },
      // -X* = 1/2 C x with C = 2 J.
      2.0 * J);
}

VectorFieldSpec VectorFieldSpec::zero(int m) {
  require_positive_dim(m);
  return VectorFieldSpec(
      m, FieldKind::Zero,
      [m](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(m); },
      [m](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Zero(m, m); },
      Eigen::MatrixXd::Zero(m, m));
}

VectorFieldSpec VectorFieldSpec::gradient_plus_linear(int m, ValueFn grad_g, JacobianFn hess_g,
                                                      Eigen::MatrixXd C) {
  require_positive_dim(m);
  if (C.rows() != m || C.cols() != m) throw DimensionError("skew matrix C must be m x m");
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (C(i, j) != -C(j, i)) {
        throw ArgumentError("gradient-plus-linear field: C is not skew-symmetric");
      }
    }
  }
  if (!grad_g || !hess_g) throw ArgumentError("gradient-plus-linear field: missing g derivatives");
  return VectorFieldSpec(
      m, FieldKind::GradientPlusLinear,
      [grad_g, C](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return grad_g(x) + 0.5 * C * x;
      },
      [hess_g, C](const Eigen::VectorXd& x) -> Eigen::MatrixXd { return hess_g(x) + 0.5 * C; },
      C);
}

VectorFieldSpec VectorFieldSpec::custom(int m, ValueFn value, JacobianFn jacobian) {
  require_positive_dim(m);
  if (!value || !jacobian) throw ArgumentError("custom field needs value and Jacobian callables");
  return VectorFieldSpec(m, FieldKind::Custom, std::move(value), std::move(jacobian),
                         Eigen::MatrixXd::Zero(m, m));
}

Eigen::VectorXd VectorFieldSpec::value(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError("field evaluated at point of wrong dimension");
  Eigen::VectorXd v;
  try {
    v = value_(x);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("field value: ") + e.what());
  }
  if (v.size() != dim_ || !v.allFinite()) throw EvaluationError("field value is not finite");
  return v;
}

Eigen::MatrixXd VectorFieldSpec::jacobian(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError("field Jacobian at point of wrong dimension");
  Eigen::MatrixXd J;
  try {
    J = jacobian_(x);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("field Jacobian: ") + e.what());
  }
  if (J.rows() != dim_ || J.cols() != dim_ || !J.allFinite()) {
    throw EvaluationError("field Jacobian is not finite");
  }
  return J;
}

CurvatureSpec CurvatureSpec::zero() { return {}; }

CurvatureSpec CurvatureSpec::constant(double value) {
  if (value == 0.0) return zero();
  return {[value](const Eigen::VectorXd&) { return value; }, std::abs(value)};
}

TwistMatrix twist_matrix(const VectorFieldSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd J = spec.jacobian(x);
  // entries(J, I) = d_J F_I - d_I F_J = J(I, J) - J(J, I).
  return {J.transpose() - J, 1e-9};
}

int twist_rank(const TwistMatrix& tm) {
  if (tm.entries.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(tm.entries);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = tm.rank_tolerance * s(0);
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > cutoff) ++rank;
  }
  return rank;
}

int singular_dim_bound(int m, int rank) { return m - (rank + 1) / 2; }

int singular_dim_bound(const VectorFieldSpec& spec, const Eigen::VectorXd& x) {
  return singular_dim_bound(spec.dim(), twist_rank(twist_matrix(spec, x)));
}

bool check_theorem_e_condition(const VectorFieldSpec& spec,
                               std::span<const Eigen::VectorXd> sample_points) {
  if (sample_points.empty()) throw ArgumentError("theorem E check needs sample points");
  for (const auto& x : sample_points) {
    if ((twist_rank(twist_matrix(spec, x)) + 1) / 2 < 2) return false;
  }
  return true;
}

double div_F_star(const VectorFieldSpec& spec, const Eigen::VectorXd& x) {
  const int m = spec.dim();
  if (m % 2 != 0) throw DimensionError("div F* needs even dimension");
  const Eigen::MatrixXd J = spec.jacobian(x);
  // F*_{2k} = F_{2k+1}, F*_{2k+1} = -F_{2k}.
  double div = 0.0;
  for (int k = 0; k < m; k += 2) div += J(k + 1, k) - J(k, k + 1);
  return div;
}

double jacobian_norm_estimate(const VectorFieldSpec& spec,
                              std::span<const Eigen::VectorXd> points) {
  double best = 0.0;
  for (const auto& x : points) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(spec.jacobian(x));
    if (svd.singularValues().size() > 0) best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

}  // namespace parea
