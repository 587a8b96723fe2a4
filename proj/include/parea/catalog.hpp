#pragma once

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "parea/error.hpp"
#include "parea/field.hpp"
#include "parea/grid.hpp"

namespace parea {

enum class InterfaceKind { SingularCurve, Kink };

const char* to_string(InterfaceKind kind);

/// Straight interface segment a -> b. The + side is to the left of b - a.
struct Interface {
  InterfaceKind kind = InterfaceKind::SingularCurve;
  Eigen::Vector2d a;
  Eigen::Vector2d b;
  std::string label;

  Eigen::Vector2d tangent() const { return (b - a).normalized(); }
  Eigen::Vector2d normal_plus() const {
    const Eigen::Vector2d t = tangent();
    return {-t.y(), t.x()};
  }
  double distance(const Eigen::Vector2d& x) const;
};

/// Explicit planar graph u(x, y) with F = (-y, x), H = 0, declared interfaces.
struct ClosedFormSurface {
  std::string name;
  std::function<double(const Eigen::Vector2d&)> value;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad;
  std::vector<Interface> interfaces;
  /// Polar angles (about the origin) along which the integrand may kink.
  std::vector<double> angle_breaks;

  double operator()(const Eigen::Vector2d& x) const { return value(x); }
  /// grad u + F with F the standard contact field.
  Eigen::Vector2d grad_plus_field(const Eigen::Vector2d& x) const {
    return grad(x) + Eigen::Vector2d(-x.y(), x.x());
  }
  double distance_to_interfaces(const Eigen::Vector2d& x) const;
  ScalarFieldGrid sample(const ScalarFieldGrid& like) const;
};

ClosedFormSurface example_7_1a(double theta);
ClosedFormSurface example_7_1b(double theta, double eta);
ClosedFormSurface example_7_2();
ClosedFormSurface pauls_u();
ClosedFormSurface pauls_v();

/// rho(theta) = cos^2 theta + cos theta sin theta, the boundary curve shared by
/// pauls_u and pauls_v on the unit circle.
double boundary_rho(double theta);
double boundary_rho_derivative(double theta);

/// Endpoint angles (theta_1, theta_2) of the ruled segments through t e^{i theta'}.
std::pair<double, double> theta_from_t(double t, double theta_prime = 3.0 * std::numbers::pi / 8.0);

/// (delta, eta) with tan delta = t sqrt(1 - t^2/2) / (1 - t^2/sqrt 2), eta = pi/2 + theta_2 - delta.
std::pair<double, double> delta_eta(double t);

/// Straight segment with a linear height profile: a Legendrian candidate.
struct LiftedSegment {
  Eigen::Vector2d p0, p1;
  double z0 = 0.0, z1 = 0.0;
};

/// The minimizer for boundary data rho on the unit disc, assembled from
/// straight Legendrian segments: a singular diameter L at angle theta', two
/// ruled families joining L to the circle, and four fans of parallel chords.
class MinimizerConstruction {
 public:
  enum class Region { Family1, Family2, Fan };

  struct Location {
    Region region = Region::Family1;
    int fan = -1;
    double s = 0.0;  // Family: fraction along A(t) -> B(t). Fan: chord level c.
    double t = 0.0;  // Family: L parameter.                  Fan: offset w along the chord.
  };

  explicit MinimizerConstruction(double theta_prime);

  double theta_prime() const { return theta_prime_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& fan_axes() const { return fan_axes_; }
  double fan_half_angle() const { return fan_half_angle_; }

  std::pair<double, double> thetas(double t) const;
  std::pair<double, double> theta_derivatives(double t) const;
  Eigen::Vector2d anchor(double t) const;  // A(t) on L

  /// Points outside the closed disc are projected radially onto the circle.
  Location locate(const Eigen::Vector2d& x) const;
  double value(const Eigen::Vector2d& x) const;
  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const;

  /// Lifted segments: per_family samples of each ruled family, per_fan chords per fan, and L.
  std::vector<LiftedSegment> segments(int per_family, int per_fan) const;
  ClosedFormSurface surface() const;

 private:
  double theta_prime_;
  double gamma_;
  double k_;  // cos(theta - theta') = k t
  double fan_half_angle_;
  std::vector<double> fan_axes_;
  std::vector<double> fan_q_;  // height of a chord midpoint: 1/2 + q (2c^2 - 1)
};

/// Builds and verifies the construction. Throws ConstructionError when the
/// ruled segments overlap or a fan admits no parallel Legendrian chords; the
/// alternative branch theta' = 7 pi / 8 fails this way.
MinimizerConstruction construct_minimizer(double theta_prime = 3.0 * std::numbers::pi / 8.0);

/// Adaptive quadrature of |grad u + F| over the unit disc, using the segment
/// parametrization of each region.
double minimizer_p_area(const MinimizerConstruction& c, double tol = 1e-9);

/// Adaptive polar quadrature of |grad u + F| for a catalog surface on the unit disc.
double closed_form_p_area(const ClosedFormSurface& s, double tol = 1e-9);

/// |du + x dy - y dx| integrated along a lifted segment.
double segment_legendrian_defect(const LiftedSegment& seg);

/// Names accepted by catalog_surface: 7.1a:theta=..., 7.1b:theta=...,eta=..., 7.2,
/// pauls-u, pauls-v, check-u.
ClosedFormSurface catalog_surface(const std::string& spec);
std::vector<std::string> catalog_names();

}  // namespace parea
