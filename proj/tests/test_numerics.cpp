#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "parea/error.hpp"
#include "parea/expression.hpp"
#include "parea/quadrature.hpp"

using namespace parea;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int n = 1; n <= 12; ++n) {
    Eigen::VectorXd x, w;
    gauss_legendre(n, x, w);
    CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (int p = 0; p < 2 * n; ++p) {
      double q = 0.0;
      for (int k = 0; k < n; ++k) q += w(k) * std::pow(x(k), p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(q == doctest::Approx(exact).epsilon(1e-13));
    }
  }
  Eigen::VectorXd x, w;
  CHECK_THROWS_AS(gauss_legendre(0, x, w), ArgumentError);
}

TEST_CASE("adaptive quadrature") {
  auto r = integrate_adaptive([](double t) { return std::sqrt(t); }, 0, 1, 1e-12);
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  r = integrate_adaptive([](double t) { return std::abs(t - 0.3); }, 0, 1, 1e-12);
  CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-11));
  const auto b = integrate_box([](double x, double y) { return x * y * y; }, 0, 2, -1, 1, 1e-12);
  CHECK(b.value == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0, 1, 0.0), ArgumentError);
}

TEST_CASE("polar disc quadrature matches the independent polar rule") {
  const auto f = [](const Eigen::Vector2d& p) { return std::sqrt(8.0) * std::abs(p.x()); };
  const std::vector<double> breaks{oracle::kPi / 2, 3 * oracle::kPi / 2};
  const double lib = integrate_disc_polar(f, Eigen::Vector2d::Zero(), 1.0, breaks, 1e-11).value;
  const double ref = oracle::polar_disc_integral(f, breaks, 2, 10);
  CHECK(lib == doctest::Approx(ref).epsilon(1e-11));
  CHECK(lib == doctest::Approx(8.0 * std::sqrt(2.0) / 3.0).epsilon(1e-11));
}

TEST_CASE("expressions") {
  const auto e = Expression::parse("2*x^2 - sin(pi*y)/3 + abs(-x) + sqrt(4) + e", {"x", "y"});
  const double x = 0.7, y = 0.2;
  CHECK(e({x, y}) == doctest::Approx(2 * x * x - std::sin(M_PI * y) / 3 + x + 2 + M_E));
  CHECK(Expression::parse("-2^2", {})({}) == doctest::Approx(-4.0));
  CHECK(Expression::parse("2^3^2", {})({}) == doctest::Approx(512.0));
  CHECK(Expression::parse("tan(x) + cos(x)", {"x"})({0.3}) ==
        doctest::Approx(std::tan(0.3) + std::cos(0.3)));
  CHECK(parse_constant("pi/3") == doctest::Approx(M_PI / 3));
  CHECK(parse_constant("5*pi/3") == doctest::Approx(5 * M_PI / 3));
  CHECK_THROWS_AS(Expression::parse("x +", {"x"}), ArgumentError);
  CHECK_THROWS_AS(Expression::parse("z", {"x"}), ArgumentError);
  CHECK_THROWS_AS(Expression::parse("(1", {}), ArgumentError);
  CHECK_THROWS_AS(parse_constant("x"), ArgumentError);
  try {
    Expression::parse("1 + * 2", {});
    FAIL("expected a parse error");
  } catch (const ArgumentError& err) {
    CHECK(std::string(err.what()).find("position") != std::string::npos);
  }
}
