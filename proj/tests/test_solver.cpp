#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "parea/catalog.hpp"
#include "parea/functional.hpp"
#include "parea/solver.hpp"

using namespace parea;
using Eigen::Vector2d;
using Eigen::VectorXd;
using oracle::kPi;

namespace {

const auto kContact = VectorFieldSpec::standard_contact(2);
const auto kZeroField = VectorFieldSpec::zero(2);
const auto kFlat = CurvatureSpec::zero();

SolveConfig quick(std::vector<double> eps) {
  SolveConfig c;
  c.epsilon_schedule = std::move(eps);
  c.stop_tol = 0.0;
  return c;
}

ScalarFieldGrid boundary_grid(const DomainSpec& d, double h, const BoundaryData& phi,
                              double interior = 0.0) {
  ScalarFieldGrid u = build_grid(d, h);
  for (Index i : u.interior_nodes()) u[i] = interior;
  return apply_boundary(u, phi);
}

double sup_interior_diff(const ScalarFieldGrid& a, const ScalarFieldGrid& b) {
  double m = 0.0;
  for (Index i : a.interior_nodes()) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("configuration validation") {
  SolveConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.epsilon_schedule.size() == 11);
  CHECK(c.epsilon_schedule.back() == std::ldexp(1.0, -10));
  auto bad = c;
  bad.epsilon_schedule = {};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.epsilon_schedule = {0.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.epsilon_schedule = {1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.sigma_schedule = {0.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.sigma_schedule = {0.5, 0.25, 1.0};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.newton_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.damping = 1.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("assemble") {
  const auto sq = DomainSpec::rectangle(Vector2d(0, 0), Vector2d(1, 1));
  const auto g = build_grid(sq, 1.0 / 8);
  SUBCASE("affine functions have zero residual without a field") {
    const auto u = g.sampled([](const VectorXd& x) { return 0.4 - 2 * x(0) + 0.7 * x(1); });
    const auto A = assemble(u, kZeroField, kFlat, 0.3);
    CHECK(A.residual.values().cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("standard contact has no b term") {
    const auto u = g.sampled([](const VectorXd& x) { return std::sin(3 * x(0)) * x(1); });
    const auto A = assemble(u, kContact, kFlat, 0.2);
    CHECK(A.b.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("coefficients are elliptic") {
    const auto disc = build_grid(DomainSpec::unit_disc(), 1.0 / 16);
    const auto u = disc.sampled([](const VectorXd& x) { return x(0) * x(1) + std::cos(2 * x(1)); });
    auto rng = oracle::rng(31);
    std::uniform_real_distribution<double> U(-1, 1);
    for (double eps : {1.0, 0.1, 1e-3}) {
      const auto A = assemble(u, kContact, kFlat, eps);
      const int n = static_cast<int>(A.p.cols());
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int k = 0; k < 1000; ++k) {
        const int node = pick(rng);
        const Eigen::VectorXd row = A.a.row(node).transpose();
        const Eigen::Map<const Eigen::Matrix2d> a(row.data());
        Vector2d xi(U(rng), U(rng));
        const double q2 = A.p.col(node).squaredNorm();
        const double bound = eps * eps * xi.squaredNorm() / std::pow(eps * eps + q2, 1.5);
        CHECK(xi.dot(a * xi) >= bound - 1e-12);
        // Closed form of the coefficient matrix.
        const Vector2d q = A.p.col(node);
        const Eigen::Matrix2d ref =
            ((eps * eps + q2) * Eigen::Matrix2d::Identity() - q * q.transpose()) /
            std::pow(eps * eps + q2, 1.5);
        CHECK((a - ref).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(assemble(g, kContact, kFlat, 0.0), ArgumentError);
  CHECK_THROWS_AS(assemble(g, kContact, kFlat, -1.0), ArgumentError);
}

TEST_CASE("affine boundary data gives the affine interpolant") {
  const BoundaryData phi{[](const VectorXd& x) { return 1.0 + 0.5 * x(0) - 0.25 * x(1); }};
  auto solve_err = [&](const DomainSpec& d, double h) {
    const auto r = newton_solve(boundary_grid(d, h, phi), kZeroField, kFlat, 0.5, 1.0, quick({0.5}), &phi);
    REQUIRE(r.converged);
    double err = 0.0;
    for (Index i : r.u.interior_nodes()) err = std::max(err, std::abs(r.u[i] - phi(r.u.position(i))));
    return err;
  };
  // Exact when the lattice is aligned with the boundary.
  CHECK(solve_err(DomainSpec::rectangle(Vector2d(0, 0), Vector2d(1, 1)), 1.0 / 16) <= 1e-12);
  // Cut cells on a curved boundary only reproduce it approximately.
  CHECK(solve_err(DomainSpec::unit_disc(), 1.0 / 16) <= 5e-3);
}

TEST_CASE("Newton stage") {
  const auto disc = DomainSpec::unit_disc();
  const auto phi = BoundaryData::from_angle(boundary_rho);
  const auto u0 = boundary_grid(disc, 1.0 / 16, phi);
  const auto cfg = quick({0.25});
  const auto r = newton_solve(u0, kContact, kFlat, 0.25, 1.0, cfg, &phi);
  REQUIRE(r.converged);
  const auto& st = r.stages.back();
  CHECK(st.residual <= cfg.newton_tol);
  SUBCASE("energy never increases") {
    REQUIRE(st.energy_history.size() >= 2);
    for (std::size_t k = 1; k < st.energy_history.size(); ++k) {
      CHECK(st.energy_history[k] <= st.energy_history[k - 1] + 1e-12);
    }
    CHECK(st.energy_history.back() ==
          doctest::Approx(discrete_energy(r.u, kContact, kFlat, 0.25, 1.0, &phi)).epsilon(1e-12));
  }
  SUBCASE("warm start") {
    const auto again = newton_solve(r.u, kContact, kFlat, 0.25, 1.0, cfg, &phi);
    CHECK(again.converged);
    CHECK(again.stages.back().iterations <= 2);
  }
  SUBCASE("maximum principle") {
    double sup_phi = 0.0;
    for (Index b : r.u.boundary_nodes()) sup_phi = std::max(sup_phi, std::abs(r.u[b]));
    CHECK(st.sup_u <= sup_phi + 10 * cfg.newton_tol);
  }
  SUBCASE("the flux residual is the negative energy gradient") {
    const auto fr = flux_residual(r.u, kContact, kFlat, 0.25, 1.0, &phi);
    CHECK(fr.values().cwiseAbs().maxCoeff() <= 1e-8);
    auto v = r.u;
    const Index i = nearest_node(v, Vector2d(0.3, 0.1));
    const double d = 1e-6;
    v[i] += d;
    const double ep = discrete_energy(v, kContact, kFlat, 0.25, 1.0, &phi);
    v[i] -= 2 * d;
    const double em = discrete_energy(v, kContact, kFlat, 0.25, 1.0, &phi);
    auto w = u0.sampled([](const VectorXd& x) { return 0.5 * x(0) * x(0) - x(1); });
    w = apply_boundary(w, phi);
    const auto fw = flux_residual(w, kContact, kFlat, 0.25, 1.0, &phi);
    auto wp = w, wm = w;
    wp[i] += d;
    wm[i] -= d;
    const double fd = (discrete_energy(wp, kContact, kFlat, 0.25, 1.0, &phi) -
                       discrete_energy(wm, kContact, kFlat, 0.25, 1.0, &phi)) / (2 * d);
    CHECK(fw[i] == doctest::Approx(-fd).epsilon(1e-6));
    CHECK(std::abs(ep - em) / (2 * d) <= 1e-6);
  }
}

TEST_CASE("comparison and uniqueness at eps = 0.1") {
  const auto disc = DomainSpec::unit_disc();
  const double h = 1.0 / 16;
  const auto cfg = quick({0.1});
  const auto phi = BoundaryData::from_angle(boundary_rho);
  const BoundaryData lower{[&](const VectorXd& x) { return phi(x) - 1.0; }};
  const auto u = newton_solve(boundary_grid(disc, h, lower), kContact, kFlat, 0.1, 1.0, cfg, &lower);
  const auto v = newton_solve(boundary_grid(disc, h, phi), kContact, kFlat, 0.1, 1.0, cfg, &phi);
  REQUIRE(u.converged);
  REQUIRE(v.converged);
  const auto rep = comparison_harness(u.u, v.u, cfg.newton_tol);
  CHECK(rep.pass);
  CHECK(rep.max_u_minus_v <= 10 * cfg.newton_tol);
  CHECK_FALSE(comparison_harness(v.u, u.u, cfg.newton_tol).pass);

  const auto hi = newton_solve(boundary_grid(disc, h, phi, 10.0), kContact, kFlat, 0.1, 1.0, cfg, &phi);
  const auto lo = newton_solve(boundary_grid(disc, h, phi, -10.0), kContact, kFlat, 0.1, 1.0, cfg, &phi);
  REQUIRE(hi.converged);
  REQUIRE(lo.converged);
  CHECK(sup_interior_diff(hi.u, lo.u) <= 1e-6);
  CHECK(sup_interior_diff(hi.u, v.u) <= 1e-6);

  CHECK_THROWS_AS(comparison_harness(u.u, build_grid(disc, 1.0 / 8), 1e-9), ArgumentError);

  // Zero field, affine traces: the ordering is exact.
  const BoundaryData a{[](const VectorXd& x) { return x(0); }};
  const BoundaryData b{[](const VectorXd& x) { return x(0) + 0.1 * x(1) + 0.2; }};
  const auto ua = newton_solve(boundary_grid(disc, h, a), kZeroField, kFlat, 0.1, 1.0, cfg, &a);
  const auto ub = newton_solve(boundary_grid(disc, h, b), kZeroField, kFlat, 0.1, 1.0, cfg, &b);
  CHECK(comparison_harness(ua.u, ub.u, cfg.newton_tol).pass);
}

TEST_CASE("continuation") {
  const auto disc = DomainSpec::unit_disc();
  const auto phi = BoundaryData::from_angle(boundary_rho);
  SolveConfig cfg;
  cfg.epsilon_schedule = {1.0, 0.5, 0.25, 0.125, 0.0625};
  cfg.stop_tol = 0.0;
  const auto r = continuation_solve(disc, 1.0 / 16, kContact, kFlat, phi, cfg);
  REQUIRE(r.converged);
  REQUIRE(r.stages.size() == 5);
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    const auto& s = r.stages[k];
    CHECK(s.converged);
    CHECK(s.residual <= cfg.newton_tol);
    CHECK(s.sigma == 1.0);
    CHECK(s.sup_grad_u <= 2 * r.stages.front().sup_grad_u);
    // Regularized area over-estimates the p-area by at most eps |Omega|.
    CHECK(s.regularized_area >= s.p_area - 1e-12);
    CHECK(s.regularized_area <= s.p_area + s.epsilon * kPi + 1e-12);
    if (k > 0) CHECK(s.regularized_area <= r.stages[k - 1].regularized_area + 1e-12);
  }

  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["converged"] == true);
  REQUIRE(j["stages"].size() == 5);
  for (const char* key :
       {"epsilon", "sigma", "iters", "residual", "sup_u", "sup_grad_u", "regularized_area"}) {
    CHECK(j["stages"][0].contains(key));
  }

  SUBCASE("stop tolerance ends the sweep early") {
    SolveConfig c2 = cfg;
    c2.stop_tol = 1.0;
    const auto r2 = continuation_solve(disc, 1.0 / 16, kContact, kFlat, phi, c2);
    CHECK(r2.converged);
    CHECK(r2.stages.size() == 2);
  }
  SUBCASE("non-convergence is reported") {
    SolveConfig c3 = cfg;
    c3.newton_max_iters = 1;
    const auto r3 = continuation_solve(disc, 1.0 / 16, kContact, kFlat, phi, c3);
    CHECK_FALSE(r3.converged);
    CHECK(r3.failed_stage >= 0);
    CHECK_FALSE(r3.message.empty());
  }
}

TEST_CASE("balanced 7.1b trace on a square") {
  // Closed form: |grad u + F| = 2|y| / |sin| on each half, so the p-area of
  // the square [-1, 1]^2 is 2 (1/|sin theta| + 1/|sin eta|).
  const double th = kPi / 3, eta = 5 * kPi / 3;
  const auto s = example_7_1b(th, eta);
  const double exact = 2 * (1 / std::abs(std::sin(th)) + 1 / std::abs(std::sin(eta)));
  const auto sq = DomainSpec::rectangle(Vector2d(-1, -1), Vector2d(1, 1));
  const BoundaryData phi{[&](const VectorXd& x) { return s(Vector2d(x(0), x(1))); }};
  SolveConfig cfg;
  cfg.epsilon_schedule = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  const auto r = continuation_solve(sq, 1.0 / 16, kContact, kFlat, phi, cfg);
  REQUIRE(r.converged);
  CHECK(r.stages.back().discrete_p_area <= exact + 5e-3);
  CHECK(std::abs(discrete_p_area(s.sample(r.u), kContact, kFlat, &phi) - exact) <= 5e-3);
}
