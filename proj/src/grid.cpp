#include "parea/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>

namespace parea {

DomainSpec DomainSpec::rectangle(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) throw DimensionError("rectangle corners differ in size");
  if (((hi - lo).array() <= 0.0).any()) throw ArgumentError("rectangle needs positive extents");
  return DomainSpec(DomainShape::Rectangle, std::move(lo), std::move(hi), 0.0, 0.0);
}

DomainSpec DomainSpec::disc(Eigen::VectorXd center, double radius) {
  if (center.size() == 0) throw DimensionError("disc center is empty");
  if (!(radius > 0.0)) throw ArgumentError("disc radius must be positive");
  Eigen::VectorXd b = center;
  return DomainSpec(DomainShape::Disc, std::move(center), std::move(b), 0.0, radius);
}

DomainSpec DomainSpec::annulus(Eigen::VectorXd center, double r_inner, double r_outer) {
  if (center.size() == 0) throw DimensionError("annulus center is empty");
  if (!(r_inner > 0.0) || !(r_inner < r_outer)) {
    throw ArgumentError("annulus needs 0 < r_inner < r_outer");
  }
  Eigen::VectorXd b = center;
  return DomainSpec(DomainShape::Annulus, std::move(center), std::move(b), r_inner, r_outer);
}

Eigen::VectorXd DomainSpec::bbox_lo() const {
  if (shape_ == DomainShape::Rectangle) return a_;
  return a_.array() - r_outer_;
}

Eigen::VectorXd DomainSpec::bbox_hi() const {
  if (shape_ == DomainShape::Rectangle) return b_;
  return a_.array() + r_outer_;
}

double DomainSpec::signed_distance(const Eigen::VectorXd& x) const {
  switch (shape_) {
    case DomainShape::Rectangle: {
      const Eigen::ArrayXd below = a_.array() - x.array();
      const Eigen::ArrayXd above = x.array() - b_.array();
      const Eigen::ArrayXd d = below.max(above);
      const double outside = d.max(0.0).matrix().norm();
      const double inside = std::min(d.maxCoeff(), 0.0);
      return outside + inside;
    }
    case DomainShape::Disc:
      return (x - a_).norm() - r_outer_;
    case DomainShape::Annulus: {
      const double r = (x - a_).norm();
      return std::max(r - r_outer_, r_inner_ - r);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd DomainSpec::nearest_boundary_point(const Eigen::VectorXd& x) const {
  switch (shape_) {
    case DomainShape::Rectangle: {
      Eigen::VectorXd p = x.cwiseMax(a_).cwiseMin(b_);
      if (signed_distance(x) < 0.0) {
        // Inside: push to the closest face.
        int best_axis = 0;
        double best = std::numeric_limits<double>::infinity();
        bool to_hi = false;
        for (int k = 0; k < x.size(); ++k) {
          if (x(k) - a_(k) < best) { best = x(k) - a_(k); best_axis = k; to_hi = false; }
          if (b_(k) - x(k) < best) { best = b_(k) - x(k); best_axis = k; to_hi = true; }
        }
        p(best_axis) = to_hi ? b_(best_axis) : a_(best_axis);
      }
      return p;
    }
    case DomainShape::Disc:
    case DomainShape::Annulus: {
      Eigen::VectorXd d = x - a_;
      double r = d.norm();
      if (r == 0.0) {
        d = Eigen::VectorXd::Unit(x.size(), 0);
        r = 1.0;
      }
      double target = r_outer_;
      if (shape_ == DomainShape::Annulus && r < 0.5 * (r_inner_ + r_outer_)) target = r_inner_;
      return a_ + (target / r) * d;
    }
  }
  return x;
}

double DomainSpec::volume() const {
  if (shape_ == DomainShape::Rectangle) return (b_ - a_).prod();
  const double m = static_cast<double>(dim());
  const double unit_ball = std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
  double v = unit_ball * std::pow(r_outer_, m);
  if (shape_ == DomainShape::Annulus) v -= unit_ball * std::pow(r_inner_, m);
  return v;
}

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior: return "interior";
    case NodeClass::Boundary: return "boundary";
    case NodeClass::Exterior: return "exterior";
  }
  return "?";
}

ScalarFieldGrid::ScalarFieldGrid(DomainSpec domain, double h, Eigen::VectorXd origin,
                                 Eigen::VectorXi shape, std::vector<NodeClass> classes)
    : domain_(std::move(domain)),
      h_(h),
      cell_volume_(std::pow(h, static_cast<double>(shape.size()))),
      origin_(std::move(origin)),
      shape_(std::move(shape)),
      classes_(std::move(classes)) {
  const int m = static_cast<int>(shape_.size());
  strides_.assign(m, 1);
  for (int k = m - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * shape_(k + 1);
  for (Index i = 0; i < static_cast<Index>(classes_.size()); ++i) {
    if (classes_[i] == NodeClass::Interior) interior_.push_back(i);
    if (classes_[i] == NodeClass::Boundary) boundary_.push_back(i);
  }
  values_ = Eigen::VectorXd::Zero(static_cast<Index>(classes_.size()));
}

Eigen::VectorXi ScalarFieldGrid::multi_index(Index node) const {
  Eigen::VectorXi idx(shape_.size());
  for (int k = 0; k < shape_.size(); ++k) {
    idx(k) = static_cast<int>(node / strides_[k]);
    node %= strides_[k];
  }
  return idx;
}

Index ScalarFieldGrid::linear_index(const Eigen::VectorXi& multi) const {
  Index node = 0;
  for (int k = 0; k < shape_.size(); ++k) node += multi(k) * strides_[k];
  return node;
}

Eigen::VectorXd ScalarFieldGrid::position(Index node) const {
  Eigen::VectorXd x(shape_.size());
  for (int k = 0; k < shape_.size(); ++k) {
    x(k) = origin_(k) + h_ * static_cast<double>(node / strides_[k]);
    node %= strides_[k];
  }
  return x;
}

Index ScalarFieldGrid::neighbor(Index node, int axis, int dir) const {
  const Index ik = (node / strides_[axis]) % shape_(axis);
  const Index jk = ik + dir;
  if (jk < 0 || jk >= shape_(axis)) return -1;
  return node + dir * strides_[axis];
}

ScalarFieldGrid ScalarFieldGrid::sampled(
    const std::function<double(const Eigen::VectorXd&)>& f) const {
  ScalarFieldGrid out = zeros_like();
  for (Index i = 0; i < node_count(); ++i) {
    if (is_active(i)) out.values_(i) = f(position(i));
  }
  return out;
}

ScalarFieldGrid ScalarFieldGrid::zeros_like() const {
  ScalarFieldGrid out = *this;
  out.values_.setZero();
  return out;
}

bool ScalarFieldGrid::same_lattice(const ScalarFieldGrid& other) const {
  return h_ == other.h_ && shape_ == other.shape_ && origin_ == other.origin_ &&
         classes_ == other.classes_;
}

BoundaryData BoundaryData::from_angle(std::function<double(double)> phi_theta,
                                      Eigen::Vector2d center, Smoothness smoothness) {
  return {[phi_theta = std::move(phi_theta), center](const Eigen::VectorXd& x) {
            if (x.size() != 2) throw DimensionError("angular boundary data is planar");
            return phi_theta(std::atan2(x(1) - center(1), x(0) - center(0)));
          },
          smoothness};
}

BoundaryData BoundaryData::constant(double value) {
  return {[value](const Eigen::VectorXd&) { return value; }, Smoothness::C2};
}

ScalarFieldGrid build_grid(const DomainSpec& domain, double h, int min_interior_per_axis) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("grid spacing must be positive");
  const int m = domain.dim();
  const Eigen::VectorXd lo = domain.bbox_lo();
  const Eigen::VectorXd hi = domain.bbox_hi();
  Eigen::VectorXd origin = lo.array() - h;
  Eigen::VectorXi shape(m);
  double total = 1.0;
  for (int k = 0; k < m; ++k) {
    shape(k) = static_cast<int>(std::floor((hi(k) + h - origin(k)) / h + 1e-9)) + 1;
    total *= shape(k);
  }
  if (total > 5e8) throw ResolutionError("grid too large");

  const auto n = static_cast<Index>(total);
  std::vector<NodeClass> classes(n, NodeClass::Exterior);
  ScalarFieldGrid probe(domain, h, origin, shape, classes);
  const double margin = 1e-9 * h;
  for (Index i = 0; i < n; ++i) {
    if (domain.contains(probe.position(i), margin)) classes[i] = NodeClass::Interior;
  }
  // The band is the full lattice neighbourhood (diagonals included), so every
  // cell touching an interior node has all its corners active.
  std::vector<Index> offsets;
  for (int code = 0; code < static_cast<int>(std::pow(3, m)); ++code) {
    Index off = 0;
    for (int k = 0, c = code; k < m; ++k, c /= 3) off += (c % 3 - 1) * probe.stride(k);
    if (off != 0) offsets.push_back(off);
  }
  for (Index i = 0; i < n; ++i) {
    if (classes[i] != NodeClass::Interior) continue;
    for (Index off : offsets) {
      const Index j = i + off;
      if (classes[j] == NodeClass::Exterior) classes[j] = NodeClass::Boundary;
    }
  }
  ScalarFieldGrid grid(domain, h, std::move(origin), std::move(shape), std::move(classes));
  for (int k = 0; k < m; ++k) {
    std::set<int> coords;
    for (Index i : grid.interior_nodes()) coords.insert(grid.multi_index(i)(k));
    if (static_cast<int>(coords.size()) < min_interior_per_axis) {
      throw ResolutionError("spacing " + std::to_string(h) + " leaves " +
                            std::to_string(coords.size()) + " interior nodes on axis " +
                            std::to_string(k));
    }
  }
  return grid;
}

ScalarFieldGrid apply_boundary(ScalarFieldGrid u, const BoundaryData& data, double sigma) {
  if (sigma < 0.0 || sigma > 1.0) throw ArgumentError("boundary scale sigma must lie in [0,1]");
  const DomainSpec& domain = u.domain();
  for (Index b : u.boundary_nodes()) {
    const double v = data(domain.nearest_boundary_point(u.position(b)));
    if (!std::isfinite(v)) throw EvaluationError("boundary datum is not finite");
    u[b] = sigma * v;
  }
  return u;
}

Eigen::VectorXd grad_u(const ScalarFieldGrid& u, Index node) {
  if (!u.is_interior(node)) {
    throw ClassificationError("gradient requested at a " +
                              std::string(to_string(u.classification(node))) + " node");
  }
  const int m = u.dim();
  Eigen::VectorXd g(m);
  const double inv2h = 0.5 / u.spacing();
  for (int k = 0; k < m; ++k) {
    g(k) = (u[u.neighbor(node, k, 1)] - u[u.neighbor(node, k, -1)]) * inv2h;
  }
  return g;
}

Eigen::VectorXd gradient(const ScalarFieldGrid& u, const VectorFieldSpec& F, Index node) {
  if (F.dim() != u.dim()) throw DimensionError("field and grid dimensions differ");
  return grad_u(u, node) + F.value(u.position(node));
}

std::optional<double> p_convexity_certificate(const DomainSpec& domain) {
  // A ball of radius R lies above the osculating parabola x2 = x1^2 / (2R)
  // at every boundary point. Flat faces and concave inner spheres admit no a.
  if (domain.shape() == DomainShape::Disc) return 1.0 / (2.0 * domain.radius());
  return std::nullopt;
}

void write_grid_csv(std::ostream& os, const ScalarFieldGrid& u) {
  const int m = u.dim();
  for (int k = 0; k < m; ++k) os << "x_" << (k + 1) << ',';
  os << "class,value\n";
  char buf[64];
  for (Index i = 0; i < u.node_count(); ++i) {
    if (!u.is_active(i)) continue;
    const Eigen::VectorXd x = u.position(i);
    for (int k = 0; k < m; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x(k));
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", u[i]);
    os << to_string(u.classification(i)) << ',' << buf << '\n';
  }
}

Index nearest_node(const ScalarFieldGrid& u, const Eigen::VectorXd& x) {
  Eigen::VectorXi idx(u.dim());
  for (int k = 0; k < u.dim(); ++k) {
    const double r = std::round((x(k) - u.origin()(k)) / u.spacing());
    idx(k) = static_cast<int>(std::clamp(r, 0.0, static_cast<double>(u.shape()(k) - 1)));
  }
  Index best = u.linear_index(idx);
  if (u.is_active(best)) return best;
  double best_d = std::numeric_limits<double>::infinity();
  best = -1;
  for (Index i = 0; i < u.node_count(); ++i) {
    if (!u.is_active(i)) continue;
    const double d = (u.position(i) - x).squaredNorm();
    if (d < best_d) { best_d = d; best = i; }
  }
  return best;
}

}  // namespace parea
