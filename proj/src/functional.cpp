#include "parea/functional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

namespace parea {

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

namespace {

void check_dims(const ScalarFieldGrid& u, const VectorFieldSpec& F) {
  if (u.dim() != F.dim()) throw DimensionError("field and grid dimensions differ");
}

double grid_sum(const ScalarFieldGrid& u, const std::vector<double>& terms) {
  return pairwise_sum(terms) * u.cell_volume();
}

}  // namespace

double p_area(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H) {
  check_dims(u, F);
  std::vector<double> terms;
  terms.reserve(u.interior_nodes().size());
  for (Index i : u.interior_nodes()) {
    double t = gradient(u, F, i).norm();
    if (!H.is_zero()) t += H(u.position(i)) * u[i];
    terms.push_back(t);
  }
  return grid_sum(u, terms);
}

double regularized_area(const ScalarFieldGrid& u, const VectorFieldSpec& F, double eps) {
  if (eps < 0.0) throw ArgumentError("regularization eps must be nonnegative");
  check_dims(u, F);
  std::vector<double> terms;
  terms.reserve(u.interior_nodes().size());
  for (Index i : u.interior_nodes()) {
    const double g2 = gradient(u, F, i).squaredNorm();
    terms.push_back(std::sqrt(eps * eps + g2));
  }
  return grid_sum(u, terms);
}

std::optional<Eigen::VectorXd> legendrian_normal(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                                                 Index node, double tau) {
  const Eigen::VectorXd g = gradient(u, F, node);
  const double n = g.norm();
  if (n < tau || n == 0.0) return std::nullopt;
  return Eigen::VectorXd(g / n);
}

double default_singular_threshold(const ScalarFieldGrid& u, const VectorFieldSpec& F) {
  check_dims(u, F);
  std::vector<Eigen::VectorXd> sample;
  const auto& nodes = u.interior_nodes();
  const std::size_t step = std::max<std::size_t>(1, nodes.size() / 64);
  for (std::size_t k = 0; k < nodes.size(); k += step) sample.push_back(u.position(nodes[k]));
  return 4.0 * u.spacing() * (1.0 + jacobian_norm_estimate(F, sample));
}

SingularSet singular_set(const ScalarFieldGrid& u, const VectorFieldSpec& F, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("singular threshold must be positive");
  check_dims(u, F);
  SingularSet S;
  S.threshold = tau;
  S.mask.assign(static_cast<std::size_t>(u.node_count()), false);
  for (Index i : u.interior_nodes()) {
    if (gradient(u, F, i).norm() < tau) {
      S.mask[i] = true;
      S.nodes.push_back(i);
    }
  }
  S.measure = static_cast<double>(S.nodes.size()) * u.cell_volume();

  std::vector<bool> seen(S.mask.size(), false);
  for (Index seed : S.nodes) {
    if (seen[seed]) continue;
    SingularComponent comp;
    std::deque<Index> queue{seed};
    seen[seed] = true;
    while (!queue.empty()) {
      const Index i = queue.front();
      queue.pop_front();
      comp.nodes.push_back(i);
      for (int k = 0; k < u.dim(); ++k) {
        for (int dir : {-1, 1}) {
          const Index j = u.neighbor(i, k, dir);
          if (j >= 0 && S.mask[j] && !seen[j]) {
            seen[j] = true;
            queue.push_back(j);
          }
        }
      }
    }
    std::sort(comp.nodes.begin(), comp.nodes.end());
    comp.measure = static_cast<double>(comp.nodes.size()) * u.cell_volume();
    comp.centroid = Eigen::VectorXd::Zero(u.dim());
    for (Index i : comp.nodes) comp.centroid += u.position(i);
    comp.centroid /= static_cast<double>(comp.nodes.size());
    if (u.dim() == 2) {
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (Index i : comp.nodes) {
        const Eigen::Vector2d d = u.position(i) - comp.centroid;
        cov += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
      comp.direction = eig.eigenvectors().col(1);
      comp.fit_residual = std::sqrt(std::max(0.0, eig.eigenvalues()(0)) /
                                    static_cast<double>(comp.nodes.size()));
    }
    S.components.push_back(std::move(comp));
  }
  return S;
}

std::string to_json(const VariationReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\"right_limit\":%.17g,\"left_limit\":%.17g,\"singular_term\":%.17g,"
                "\"bulk_term\":%.17g,\"curvature_term\":%.17g}",
                r.right_limit, r.left_limit, r.singular_term, r.bulk_term, r.curvature_term);
  return buf;
}

namespace {

VariationReport variation_terms(const ScalarFieldGrid& u, const ScalarFieldGrid& phi,
                                const VectorFieldSpec& F, const CurvatureSpec& H,
                                const SingularSet& S) {
  std::vector<double> sing, bulk, curv;
  for (Index i : u.interior_nodes()) {
    const Eigen::VectorXd gphi = grad_u(phi, i);
    if (S.contains(i)) {
      sing.push_back(gphi.norm());
    } else {
      const Eigen::VectorXd g = gradient(u, F, i);
      bulk.push_back(g.dot(gphi) / g.norm());
    }
    if (!H.is_zero()) curv.push_back(H(u.position(i)) * phi[i]);
  }
  VariationReport r;
  r.singular_term = grid_sum(u, sing);
  r.bulk_term = grid_sum(u, bulk);
  r.curvature_term = grid_sum(u, curv);
  r.right_limit = r.singular_term + r.bulk_term + r.curvature_term;
  r.left_limit = -r.singular_term + r.bulk_term + r.curvature_term;
  return r;
}

void require_compact_support(const ScalarFieldGrid& u, const ScalarFieldGrid& phi) {
  if (!u.same_lattice(phi)) throw ArgumentError("test function lives on a different grid");
  for (Index b : phi.boundary_nodes()) {
    if (phi[b] != 0.0) throw ArgumentError("test function does not vanish on the boundary band");
  }
}

}  // namespace

VariationReport first_variation(const ScalarFieldGrid& u, const ScalarFieldGrid& phi,
                                const VectorFieldSpec& F, const CurvatureSpec& H, double tau) {
  check_dims(u, F);
  require_compact_support(u, phi);
  return variation_terms(u, phi, F, H, singular_set(u, F, tau));
}

double weak_solution_residual(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                              const CurvatureSpec& H, double tau,
                              std::span<const ScalarFieldGrid> test_bumps) {
  if (test_bumps.empty()) throw ArgumentError("weak-solution test family is empty");
  check_dims(u, F);
  const SingularSet S = singular_set(u, F, tau);
  double worst = 0.0;
  for (const auto& phi : test_bumps) {
    require_compact_support(u, phi);
    const VariationReport r = variation_terms(u, phi, F, H, S);
    // phi gives right_limit; -phi gives singular - bulk - curvature = -left_limit.
    worst = std::max({worst, -r.right_limit, r.left_limit});
  }
  return worst;
}

ScalarFieldGrid make_bump(const ScalarFieldGrid& like, const Eigen::VectorXd& center,
                          double radius) {
  if (!(radius > 0.0)) throw ArgumentError("bump radius must be positive");
  ScalarFieldGrid phi = like.zeros_like();
  const double peak = std::exp(static_cast<double>(like.dim()));
  for (Index i : like.interior_nodes()) {
    const Eigen::VectorXd x = like.position(i);
    double v = peak;
    for (int k = 0; k < like.dim() && v != 0.0; ++k) {
      const double t = (x(k) - center(k)) / radius;
      v = std::abs(t) < 1.0 ? v * std::exp(-1.0 / (1.0 - t * t)) : 0.0;
    }
    phi[i] = v;
  }
  return phi;
}

std::vector<ScalarFieldGrid> bump_family(const ScalarFieldGrid& like, const SingularSet& singular,
                                         int count, std::uint64_t seed) {
  if (count <= 0) throw ArgumentError("bump family size must be positive");
  const DomainSpec& domain = like.domain();
  const int m = like.dim();
  const double h = like.spacing();
  const Eigen::VectorXd lo = domain.bbox_lo();
  const Eigen::VectorXd hi = domain.bbox_hi();
  const double scale = (hi - lo).minCoeff();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto support_inside = [&](const Eigen::VectorXd& c, double r) {
    // every corner of the support cube must be inside (convex domains) and,
    // for annuli, the cube must also avoid the hole.
    for (int mask = 0; mask < (1 << m); ++mask) {
      Eigen::VectorXd corner = c;
      for (int k = 0; k < m; ++k) corner(k) += ((mask >> k) & 1) ? r : -r;
      if (!domain.contains(corner, 2.0 * h)) return false;
    }
    if (domain.shape() == DomainShape::Annulus) {
      const Eigen::VectorXd d = (c - domain.center()).cwiseAbs();
      const Eigen::VectorXd near = (d.array() - r).max(0.0);
      if (near.norm() <= domain.r_inner() + 2.0 * h) return false;
    }
    return true;
  };

  std::vector<ScalarFieldGrid> family;
  const int on_singular = singular.components.empty() ? 0 : count / 3;
  int attempts = 0;
  while (static_cast<int>(family.size()) < on_singular && attempts++ < 100 * count) {
    const auto& nodes = singular.nodes;
    const Index node = nodes[static_cast<std::size_t>(unit(rng) * nodes.size()) % nodes.size()];
    const Eigen::VectorXd c = like.position(node);
    const double r = scale * (0.08 + 0.17 * unit(rng));
    if (r > 4.0 * h && support_inside(c, r)) family.push_back(make_bump(like, c, r));
  }
  while (static_cast<int>(family.size()) < count && attempts++ < 1000 * count) {
    Eigen::VectorXd c(m);
    for (int k = 0; k < m; ++k) c(k) = lo(k) + (hi(k) - lo(k)) * unit(rng);
    const double r = scale * (0.05 + 0.15 * unit(rng));
    if (r > 4.0 * h && support_inside(c, r)) family.push_back(make_bump(like, c, r));
  }
  if (family.empty()) throw ResolutionError("no test bump fits inside the domain");
  return family;
}

MonotonePair monotone_pair_inequality(const Eigen::Ref<const Eigen::VectorXd>& gu,
                                      const Eigen::Ref<const Eigen::VectorXd>& gv,
                                      const Eigen::Ref<const Eigen::VectorXd>& Fx, double eps) {
  if (eps < 0.0) throw ArgumentError("eps must be nonnegative");
  if (gu.size() != gv.size() || gu.size() != Fx.size()) {
    throw DimensionError("monotone pair: vector sizes differ");
  }
  const Eigen::VectorXd pu = gu + Fx;
  const Eigen::VectorXd pv = gv + Fx;
  const double alpha = std::sqrt(eps * eps + pu.squaredNorm());
  const double beta = std::sqrt(eps * eps + pv.squaredNorm());
  if (alpha == 0.0 || beta == 0.0) {
    throw SingularityError("monotone pair: grad + F vanishes with eps = 0");
  }
  const Eigen::VectorXd dN = pu / alpha - pv / beta;
  return {dN.dot(gu - gv), 0.5 * (alpha + beta) * dN.squaredNorm()};
}

}  // namespace parea
