#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parea/catalog.hpp"
#include "parea/field.hpp"
#include "parea/functional.hpp"
#include "parea/grid.hpp"

namespace parea {

/// Point-wise access to a planar graph: height and grad u + F anywhere in the
/// domain. Built from a closed form or by interpolating a grid.
struct PlanarSurface {
  std::function<double(const Eigen::Vector2d&)> value;
  std::function<std::optional<Eigen::Vector2d>(const Eigen::Vector2d&)> grad_plus_field;
  std::function<bool(const Eigen::Vector2d&)> inside;
  /// Length scale of the data: grid spacing, or a small step for closed forms.
  double resolution = 1e-3;
};

PlanarSurface planar_view(const ClosedFormSurface& s, const DomainSpec& domain);
/// Bilinear interpolation of u and of its central-difference gradient; F is
/// added exactly. Defined where the surrounding cell has four interior nodes.
PlanarSurface planar_view(const ScalarFieldGrid& u, const VectorFieldSpec& F);

/// N-perp = (n2, -n1) for N = (grad u + F)/|grad u + F|; nothing where |grad u + F| < tau.
std::optional<Eigen::Vector2d> characteristic_direction(const PlanarSurface& s,
                                                        const Eigen::Vector2d& x, double tau);
std::optional<Eigen::Vector2d> characteristic_direction(const ScalarFieldGrid& u,
                                                        const VectorFieldSpec& F, Index node,
                                                        double tau);

struct CharacteristicRay {
  Eigen::Vector2d base;
  Eigen::Vector2d direction;  // unit, from the end behind base towards the end ahead
  Eigen::Vector2d start, end;
  std::vector<Eigen::Vector2d> points;  // traced vertices from start to end
  std::vector<double> heights;          // lift z = u along the vertices
  double straightness = 0.0;            // max angle between traced N-perp and direction
  double lift_slope = 0.0;              // dz/ds forced by dz = y dx - x dy on the line
};

/// Marches both ways along N-perp from x0 until the domain boundary or the
/// singular band |grad u + F| < tau. Throws SingularityError at a singular start.
CharacteristicRay trace_ray(const PlanarSurface& s, const Eigen::Vector2d& x0, double tau,
                            double step = 0.0, double max_length = 10.0);

struct InterfaceSample {
  Eigen::Vector2d point;
  Eigen::Vector2d tangent;
  Eigen::Vector2d normal_plus;
  std::optional<Eigen::Vector2d> n_plus, n_minus;
  InterfaceKind kind = InterfaceKind::SingularCurve;
  std::string label;
};

/// (N+ - N-) . nu+. Throws ArgumentError when a one-sided normal is missing.
double jump_defect(const InterfaceSample& s);

/// One-sided limit of N at p from the side of nu, by quadratic extrapolation
/// N(0) ~ 3 N(d) - 3 N(2d) + N(3d), renormalized.
std::optional<Eigen::Vector2d> one_sided_normal(const PlanarSurface& s, const Eigen::Vector2d& p,
                                                const Eigen::Vector2d& nu, double delta);

InterfaceSample sample_interface(const PlanarSurface& s, const Interface& iface,
                                 const Eigen::Vector2d& p, double delta);

struct AngleReport {
  double incident = 0.0;
  double reflected = 0.0;
  bool pass = false;
};

/// Angles between the oriented tangent and the two rays, each pointing away
/// from the sample into its own side.
AngleReport angle_criterion(const InterfaceSample& s, const CharacteristicRay& ray_in,
                            const CharacteristicRay& ray_out, double angle_tol = 1e-3);

/// Sum over the ray's lifted polyline of |dz + x dy - y dx|.
double legendrian_defect(const CharacteristicRay& ray);

/// Twice the signed area of a closed polygon: the integral of x dy - y dx.
double loop_obstruction(std::span<const Eigen::Vector2d> loop);

enum class Outcome { Minimizer, NotMinimizer, Inconclusive };
const char* to_string(Outcome o);

struct MinimizerVerdict {
  Outcome outcome = Outcome::Inconclusive;
  std::string route;
  std::optional<InterfaceSample> witness;
  double witness_defect = 0.0;
  double max_defect = 0.0;
  int samples = 0;
  double defect_tol = 0.0;
};

std::string to_json(const MinimizerVerdict& v);

struct VerdictOptions {
  double defect_tol = -1.0;    // negative: 10 h + 1e-6
  int samples_per_interface = 64;
  double endpoint_skip = 0.05; // arclength excluded at interface ends
  double delta = -1.0;         // offset for one-sided normals; negative: automatic
};

/// Verdict for a grid function. Interfaces are taken from `interfaces` when
/// given, otherwise fitted to the detected singular components.
MinimizerVerdict minimizer_verdict(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                                   const CurvatureSpec& H, double tau,
                                   const std::vector<Interface>* interfaces = nullptr,
                                   VerdictOptions opts = {});

/// Verdict for a catalog surface on a planar domain, sampling its declared
/// interfaces with the exact gradient. h sets the default defect tolerance.
MinimizerVerdict minimizer_verdict(const ClosedFormSurface& s, const DomainSpec& domain, double h,
                                   VerdictOptions opts = {});

/// Fitted straight interfaces for components with more than three nodes.
std::vector<Interface> fitted_interfaces(const ScalarFieldGrid& u, const SingularSet& S);

/// Polyline CSV: rows "x,y" or "x,y,z", one blank line between polylines.
void write_polylines_csv(std::ostream& os, const std::vector<std::vector<Eigen::Vector2d>>& lines);
void write_polylines_csv(std::ostream& os, const std::vector<CharacteristicRay>& rays);

}  // namespace parea
