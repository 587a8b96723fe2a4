#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parea/field.hpp"
#include "parea/grid.hpp"

namespace parea {

/// Sum in a fixed pairwise order; results do not depend on threading.
double pairwise_sum(std::span<const double> terms);

/// Midpoint quadrature of |grad u + F| + H u over interior nodes, weight h^m.
double p_area(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H);

/// Quadrature of sqrt(eps^2 + |grad u + F|^2) over interior nodes.
double regularized_area(const ScalarFieldGrid& u, const VectorFieldSpec& F, double eps);

/// N(u) = (grad u + F)/|grad u + F|, or nothing where |grad u + F| < tau.
std::optional<Eigen::VectorXd> legendrian_normal(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                                                 Index node, double tau);

/// 4h (1 + |dF|), with |dF| the largest Jacobian norm over a node sample.
double default_singular_threshold(const ScalarFieldGrid& u, const VectorFieldSpec& F);

struct SingularComponent {
  std::vector<Index> nodes;
  Eigen::VectorXd centroid;
  /// Total-least-squares line direction (planar grids only, else empty).
  Eigen::VectorXd direction;
  /// RMS distance of the component nodes to the fitted line.
  double fit_residual = 0.0;
  double measure = 0.0;
};

/// Nodes where |grad u + F| < threshold, split into axis-adjacent components.
struct SingularSet {
  double threshold = 0.0;
  std::vector<Index> nodes;  // sorted
  std::vector<SingularComponent> components;
  std::vector<bool> mask;    // indexed by node
  double measure = 0.0;

  bool contains(Index node) const { return mask[node]; }
  bool empty() const { return nodes.empty(); }
};

SingularSet singular_set(const ScalarFieldGrid& u, const VectorFieldSpec& F, double tau);

/// One-sided derivatives of the p-area along u + t phi at t = 0.
struct VariationReport {
  double right_limit = 0.0;
  double left_limit = 0.0;
  double singular_term = 0.0;
  double bulk_term = 0.0;
  double curvature_term = 0.0;
};

std::string to_json(const VariationReport& report);

VariationReport first_variation(const ScalarFieldGrid& u, const ScalarFieldGrid& phi,
                                const VectorFieldSpec& F, const CurvatureSpec& H, double tau);

/// max over phi in the family and over +-phi of the negative part of
///   int_S |grad phi| + int_{Omega \ S} N(u).grad phi + int H phi.
double weak_solution_residual(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                              const CurvatureSpec& H, double tau,
                              std::span<const ScalarFieldGrid> test_bumps);

/// Tensor-product C-infinity bump of unit height supported in the cube
/// |x - center|_inf < radius. Zero on non-interior nodes.
ScalarFieldGrid make_bump(const ScalarFieldGrid& like, const Eigen::VectorXd& center,
                          double radius);

/// Random bumps whose supports stay inside the domain, plus bumps centred on
/// detected singular components when any exist.
std::vector<ScalarFieldGrid> bump_family(const ScalarFieldGrid& like, const SingularSet& singular,
                                         int count, std::uint64_t seed);

struct MonotonePair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of (N_eps(u) - N_eps(v)).(gu - gv) >= (alpha+beta)/2 |N_eps(u) - N_eps(v)|^2
/// at one point, where alpha = |(eps, gu + F)| and beta = |(eps, gv + F)|.
MonotonePair monotone_pair_inequality(const Eigen::Ref<const Eigen::VectorXd>& gu,
                                      const Eigen::Ref<const Eigen::VectorXd>& gv,
                                      const Eigen::Ref<const Eigen::VectorXd>& Fx, double eps);

}  // namespace parea
