#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "parea/error.hpp"
#include "parea/field.hpp"

namespace parea {

using Index = Eigen::Index;

enum class DomainShape { Rectangle, Disc, Annulus };

/// Bounded domain in R^m: axis-aligned box, ball, or spherical shell.
class DomainSpec {
 public:
  static DomainSpec rectangle(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static DomainSpec disc(Eigen::VectorXd center, double radius);
  static DomainSpec annulus(Eigen::VectorXd center, double r_inner, double r_outer);

  /// Unit disc in the plane, the home of every catalog example.
  static DomainSpec unit_disc() { return disc(Eigen::Vector2d::Zero(), 1.0); }

  DomainShape shape() const noexcept { return shape_; }
  int dim() const noexcept { return static_cast<int>(a_.size()); }

  const Eigen::VectorXd& lo() const noexcept { return a_; }       // rectangle
  const Eigen::VectorXd& hi() const noexcept { return b_; }       // rectangle
  const Eigen::VectorXd& center() const noexcept { return a_; }   // disc, annulus
  double radius() const noexcept { return r_outer_; }             // disc
  double r_inner() const noexcept { return r_inner_; }
  double r_outer() const noexcept { return r_outer_; }

  Eigen::VectorXd bbox_lo() const;
  Eigen::VectorXd bbox_hi() const;

  /// Signed distance, negative inside.
  double signed_distance(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double margin = 0.0) const {
    return signed_distance(x) < -margin;
  }
  Eigen::VectorXd nearest_boundary_point(const Eigen::VectorXd& x) const;
  double volume() const;

 private:
  DomainSpec(DomainShape shape, Eigen::VectorXd a, Eigen::VectorXd b, double r_inner,
             double r_outer)
      : shape_(shape), a_(std::move(a)), b_(std::move(b)), r_inner_(r_inner), r_outer_(r_outer) {}

  DomainShape shape_;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  double r_inner_ = 0.0;
  double r_outer_ = 0.0;
};

enum class NodeClass : std::uint8_t { Interior, Boundary, Exterior };

const char* to_string(NodeClass c);

/// Values of u on a uniform lattice masked by a domain.
///
/// Interior nodes lie strictly inside the domain. Boundary-band nodes are the
/// non-interior nodes in the lattice neighbourhood (diagonals included) of an
/// interior node; they carry Dirichlet data. Everything else is exterior.
class ScalarFieldGrid {
 public:
  ScalarFieldGrid(DomainSpec domain, double h, Eigen::VectorXd origin, Eigen::VectorXi shape,
                  std::vector<NodeClass> classes);

  const DomainSpec& domain() const noexcept { return domain_; }
  int dim() const noexcept { return static_cast<int>(shape_.size()); }
  double spacing() const noexcept { return h_; }
  double cell_volume() const noexcept { return cell_volume_; }
  const Eigen::VectorXi& shape() const noexcept { return shape_; }
  const Eigen::VectorXd& origin() const noexcept { return origin_; }
  Index node_count() const noexcept { return static_cast<Index>(classes_.size()); }

  Index stride(int axis) const noexcept { return strides_[axis]; }
  Eigen::VectorXi multi_index(Index node) const;
  Index linear_index(const Eigen::VectorXi& multi) const;
  Eigen::VectorXd position(Index node) const;
  /// Axis neighbor in direction dir (+1 / -1), or -1 off the lattice.
  Index neighbor(Index node, int axis, int dir) const;

  NodeClass classification(Index node) const { return classes_[node]; }
  bool is_interior(Index node) const { return classes_[node] == NodeClass::Interior; }
  bool is_active(Index node) const { return classes_[node] != NodeClass::Exterior; }
  const std::vector<Index>& interior_nodes() const noexcept { return interior_; }
  const std::vector<Index>& boundary_nodes() const noexcept { return boundary_; }

  Eigen::VectorXd& values() noexcept { return values_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](Index node) const { return values_[node]; }
  double& operator[](Index node) { return values_[node]; }

  /// Same lattice and mask, values replaced by f(position) on active nodes.
  ScalarFieldGrid sampled(const std::function<double(const Eigen::VectorXd&)>& f) const;
  /// Same lattice and mask, all values zero.
  ScalarFieldGrid zeros_like() const;
  bool same_lattice(const ScalarFieldGrid& other) const;

 private:
  DomainSpec domain_;
  double h_;
  double cell_volume_;
  Eigen::VectorXd origin_;
  Eigen::VectorXi shape_;
  std::vector<Index> strides_;
  std::vector<NodeClass> classes_;
  std::vector<Index> interior_;
  std::vector<Index> boundary_;
  Eigen::VectorXd values_;
};

enum class Smoothness { C0, C2 };

/// Dirichlet datum phi, evaluated at points of the domain boundary.
struct BoundaryData {
  std::function<double(const Eigen::VectorXd&)> phi;
  Smoothness smoothness = Smoothness::C2;

  /// phi(theta) for a planar disc or annulus centred at center.
  static BoundaryData from_angle(std::function<double(double)> phi_theta,
                                 Eigen::Vector2d center = Eigen::Vector2d::Zero(),
                                 Smoothness smoothness = Smoothness::C2);
  static BoundaryData constant(double value);

  double operator()(const Eigen::VectorXd& x) const { return phi(x); }
};

/// Builds the masked lattice. Throws ResolutionError when some axis has fewer
/// than min_interior_per_axis distinct interior coordinates.
ScalarFieldGrid build_grid(const DomainSpec& domain, double h, int min_interior_per_axis = 3);

/// Boundary-band nodes <- sigma * phi(nearest boundary point); interior untouched.
ScalarFieldGrid apply_boundary(ScalarFieldGrid u, const BoundaryData& data, double sigma = 1.0);

/// Central-difference grad u at an interior node (no field added).
Eigen::VectorXd grad_u(const ScalarFieldGrid& u, Index node);
/// grad u + F at an interior node.
Eigen::VectorXd gradient(const ScalarFieldGrid& u, const VectorFieldSpec& F, Index node);

/// Uniform parabola constant a of a p-convex domain, if one is certified.
std::optional<double> p_convexity_certificate(const DomainSpec& domain);

/// CSV dump: header x_1,...,x_m,class,value; active nodes in lattice order.
void write_grid_csv(std::ostream& os, const ScalarFieldGrid& u);

/// Index of the active node nearest to x (exterior nodes skipped).
Index nearest_node(const ScalarFieldGrid& u, const Eigen::VectorXd& x);

}  // namespace parea
