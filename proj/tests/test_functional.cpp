#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "parea/catalog.hpp"
#include "parea/functional.hpp"

using namespace parea;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

const double kGolden = 8.0 * std::sqrt(2.0) / 3.0;

ScalarFieldGrid disc_grid(double h) { return build_grid(DomainSpec::unit_disc(), h); }

}  // namespace

TEST_CASE("pairwise sum is order-fixed and exact on integers") {
  std::vector<double> v(1000);
  for (int k = 0; k < 1000; ++k) v[k] = k;
  CHECK(pairwise_sum(v) == 499500.0);
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("p-area of the two Pauls surfaces") {
  const auto g = disc_grid(1.0 / 128);
  const auto F = VectorFieldSpec::standard_contact(2);
  const double au = p_area(pauls_u().sample(g), F, CurvatureSpec::zero());
  const double av = p_area(pauls_v().sample(g), F, CurvatureSpec::zero());
  CHECK(std::abs(au - kGolden) <= 2e-2);
  CHECK(std::abs(av - kGolden) <= 2e-2);
}

TEST_CASE("p-area vanishes when grad u = -F") {
  const auto g = build_grid(DomainSpec::rectangle(Vector2d(-1, -1), Vector2d(1, 1)), 1.0 / 32);
  // F = grad(x^2 + xy - 2y^2), u = -(x^2 + xy - 2y^2): exact under central differences.
  const auto Fq = VectorFieldSpec::custom(
      2, [](const VectorXd& x) { return Vector2d(2 * x(0) + x(1), x(0) - 4 * x(1)); },
      [](const VectorXd&) {
        Eigen::MatrixXd J(2, 2);
        J << 2, 1, 1, -4;
        return J;
      });
  const auto u = g.sampled([](const VectorXd& x) { return -(x(0) * x(0) + x(0) * x(1) - 2 * x(1) * x(1)); });
  CHECK(p_area(u, Fq, CurvatureSpec::zero()) <= 1e-12);

  // F = grad(x^2 y - y^3 / 3): only the O(h^2) truncation of the cubic remains.
  const auto Fc = VectorFieldSpec::custom(
      2, [](const VectorXd& x) { return Vector2d(2 * x(0) * x(1), x(0) * x(0) - x(1) * x(1)); },
      [](const VectorXd& x) {
        Eigen::MatrixXd J(2, 2);
        J << 2 * x(1), 2 * x(0), 2 * x(0), -2 * x(1);
        return J;
      });
  const auto u3 = g.sampled([](const VectorXd& x) { return -(x(0) * x(0) * x(1) - x(1) * x(1) * x(1) / 3); });
  CHECK(p_area(u3, Fc, CurvatureSpec::zero()) <= 1e-2);
}

TEST_CASE("regularized area") {
  const auto F = VectorFieldSpec::standard_contact(2);
  const auto g = disc_grid(1.0 / 64);
  const auto u = pauls_u().sample(g);
  CHECK(regularized_area(u, F, 0.0) == p_area(u, F, CurvatureSpec::zero()));

  const auto sq = build_grid(DomainSpec::rectangle(Vector2d(0, 0), Vector2d(1, 1)), 1.0 / 32);
  const double vol = sq.interior_nodes().size() * sq.cell_volume();
  CHECK(regularized_area(sq, VectorFieldSpec::zero(2), 1.0) == doctest::Approx(vol).epsilon(1e-14));
  CHECK(std::abs(vol - 1.0) <= 4.0 / 32);

  const double r = regularized_area(pauls_u().sample(disc_grid(1.0 / 128)), F, 0.1);
  CHECK(r >= kGolden - 2e-2);
  CHECK(r <= kGolden + 0.1 * oracle::kPi + 2e-2);
  CHECK_THROWS_AS(regularized_area(u, F, -1.0), ArgumentError);
}

TEST_CASE("Legendrian normal") {
  const auto g = disc_grid(1.0 / 16);
  const auto Z = VectorFieldSpec::zero(2);
  const auto u = g.sampled([](const VectorXd& x) { return 3 * x(0) + 4 * x(1); });
  const Index c = nearest_node(g, Vector2d(0.25, 0.25));
  const auto N = legendrian_normal(u, Z, c, 1e-6);
  REQUIRE(N.has_value());
  CHECK((*N - Vector2d(0.6, 0.8)).norm() <= 1e-14);

  const auto F = VectorFieldSpec::standard_contact(2);
  CHECK_FALSE(legendrian_normal(g, F, nearest_node(g, Vector2d::Zero()), 1e-3).has_value());
  CHECK_THROWS_AS(legendrian_normal(u, Z, g.boundary_nodes().front(), 1e-3), ClassificationError);
}

TEST_CASE("singular sets of catalog surfaces") {
  const auto F = VectorFieldSpec::standard_contact(2);
  const auto g = disc_grid(1.0 / 64);
  SUBCASE("7.1a: one component along y = 0") {
    const auto u = example_7_1a(oracle::kPi / 5).sample(g);
    const auto S = singular_set(u, F, default_singular_threshold(u, F));
    REQUIRE(S.components.size() == 1);
    const auto& c = S.components[0];
    CHECK(std::abs(c.direction(1)) <= 1e-9);
    CHECK(std::abs(c.centroid(1)) <= 1e-9);
    // Oracle: |grad u + F| = 2 |y| / sin(theta).
    for (Index i : c.nodes) {
      CHECK(2 * std::abs(u.position(i)(1)) / std::sin(oracle::kPi / 5) < S.threshold);
    }
  }
  SUBCASE("pauls-v: one component along x = y") {
    const auto u = pauls_v().sample(g);
    const auto S = singular_set(u, F, default_singular_threshold(u, F));
    REQUIRE(S.components.size() == 1);
    const auto& c = S.components[0];
    CHECK(std::abs(std::abs(c.direction(0)) - std::sqrt(0.5)) <= 1e-9);
    CHECK(c.direction(0) * c.direction(1) > 0);
    // Oracle: grad v + F = (0, 2(x - y)).
    for (Index i : c.nodes) {
      CHECK(oracle::pauls_v_grad_plus_field(u.position(i)).norm() < S.threshold);
    }
  }
  SUBCASE("zero function: a few nodes at the origin") {
    const auto S = singular_set(g, F, default_singular_threshold(g, F));
    REQUIRE(S.components.size() == 1);
    CHECK(S.components[0].centroid.norm() <= 1e-12);
    for (Index i : S.nodes) CHECK(g.position(i).norm() < S.threshold);  // |F| = r
  }
  CHECK_THROWS_AS(singular_set(g, F, 0.0), ArgumentError);
}

TEST_CASE("first variation") {
  const auto F = VectorFieldSpec::standard_contact(2);
  const auto g = disc_grid(1.0 / 32);
  const auto u = pauls_u().sample(g);
  const double tau = default_singular_threshold(u, F);
  const auto zero = first_variation(u, g.zeros_like(), F, CurvatureSpec::zero(), tau);
  CHECK(zero.right_limit == 0.0);
  CHECK(zero.left_limit == 0.0);
  CHECK(zero.singular_term == 0.0);
  CHECK(zero.bulk_term == 0.0);

  const auto phi = make_bump(g, Vector2d(0.0, 0.1), 0.4);
  const auto r = first_variation(u, phi, F, CurvatureSpec::constant(0.3), tau);
  CHECK(r.right_limit - r.left_limit == doctest::Approx(2 * r.singular_term).epsilon(1e-14));
  CHECK(r.right_limit >= r.left_limit);
  CHECK(r.singular_term > 0.0);

  auto bad = phi;
  bad[g.boundary_nodes().front()] = 1.0;
  CHECK_THROWS_AS(first_variation(u, bad, F, CurvatureSpec::zero(), tau), ArgumentError);
  const std::string js = to_json(r);
  CHECK(js.find("\"singular_term\"") != std::string::npos);
  CHECK(js.find("\"bulk_term\"") != std::string::npos);
}

TEST_CASE("weak-solution residual") {
  const auto F = VectorFieldSpec::standard_contact(2);
  SUBCASE("pauls-u with a bump straddling x = 0") {
    const auto g = disc_grid(1.0 / 64);
    const auto u = pauls_u().sample(g);
    const std::vector<ScalarFieldGrid> bumps{make_bump(g, Vector2d(0.0, 0.0), 0.5)};
    CHECK(weak_solution_residual(u, F, CurvatureSpec::zero(), default_singular_threshold(u, F),
                                 bumps) >= 0.05);
  }
  SUBCASE("zero field, zero function: no violation") {
    const auto g = disc_grid(1.0 / 32);
    const auto Z = VectorFieldSpec::zero(2);
    const auto S = singular_set(g, Z, 1e-3);
    CHECK(S.nodes.size() == g.interior_nodes().size());
    const auto bumps = bump_family(g, S, 10, 4);
    CHECK(weak_solution_residual(g, Z, CurvatureSpec::zero(), 1e-3, bumps) == 0.0);
  }
  SUBCASE("constructed minimizer") {
    const auto g = disc_grid(1.0 / 128);
    const auto u = construct_minimizer().surface().sample(g);
    const double tau = default_singular_threshold(u, F);
    const auto bumps = bump_family(u, singular_set(u, F, tau), 50, 1);
    CHECK(weak_solution_residual(u, F, CurvatureSpec::zero(), tau, bumps) <= 5e-3);
  }
  const auto g = disc_grid(1.0 / 16);
  CHECK_THROWS_AS(weak_solution_residual(g, F, CurvatureSpec::zero(), 0.1, {}), ArgumentError);
}

TEST_CASE("bump family") {
  const auto g = disc_grid(1.0 / 32);
  const auto F = VectorFieldSpec::standard_contact(2);
  const auto u = pauls_u().sample(g);
  const auto S = singular_set(u, F, default_singular_threshold(u, F));
  const auto a = bump_family(u, S, 12, 9);
  const auto b = bump_family(u, S, 12, 9);
  REQUIRE(a.size() == 12);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK((a[k].values() - b[k].values()).norm() == 0.0);
    for (Index j : g.boundary_nodes()) CHECK(a[k][j] == 0.0);
    CHECK(a[k].values().maxCoeff() > 0.0);
  }
  CHECK_THROWS_AS(bump_family(u, S, 0, 1), ArgumentError);
}

TEST_CASE("monotone pair examples") {
  const VectorXd z = Vector2d::Zero();
  auto r = monotone_pair_inequality(Vector2d(1, 0), z, z, 1.0);
  CHECK(r.lhs == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(r.rhs == doctest::Approx((std::sqrt(2.0) + 1) / 4).epsilon(1e-14));
  CHECK(r.lhs > r.rhs);

  r = monotone_pair_inequality(Vector2d(0.3, -2), Vector2d(0.3, -2), Vector2d(1, 1), 0.5);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);

  r = monotone_pair_inequality(Vector2d(1, 0), Vector2d(0, 1), z, 0.0);
  CHECK(r.lhs == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.rhs == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(monotone_pair_inequality(z, Vector2d(1, 0), z, 0.0), SingularityError);
  CHECK_THROWS_AS(monotone_pair_inequality(z, z, z, -1.0), ArgumentError);

  auto rng = oracle::rng(8);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k = 0; k < 200; ++k) {
    const Vector2d gu(U(rng), U(rng)), gv(U(rng), U(rng)), Fx(U(rng), U(rng));
    const auto lib = monotone_pair_inequality(gu, gv, Fx, 0.01 * k);
    const auto [lhs, rhs] = oracle::monotone_pair(gu, gv, Fx, 0.01 * k);
    CHECK(lib.lhs == doctest::Approx(lhs).epsilon(1e-13));
    CHECK(lib.rhs == doctest::Approx(rhs).epsilon(1e-13));
  }
}
