#include "parea/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "parea/functional.hpp"

namespace parea {

std::vector<double> SolveConfig::default_epsilon_schedule() {
  std::vector<double> s;
  for (int k = 0; k <= 10; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

void SolveConfig::validate() const {
  if (epsilon_schedule.empty()) throw ArgumentError("epsilon_schedule is empty");
  for (std::size_t k = 0; k < epsilon_schedule.size(); ++k) {
    if (!(epsilon_schedule[k] > 0.0)) throw ArgumentError("epsilon values must be positive");
    if (k > 0 && !(epsilon_schedule[k] < epsilon_schedule[k - 1])) {
      throw ArgumentError("epsilon_schedule must be strictly decreasing");
    }
  }
  if (sigma_schedule.empty() || sigma_schedule.back() != 1.0) {
    throw ArgumentError("sigma_schedule must end at 1");
  }
  for (std::size_t k = 0; k < sigma_schedule.size(); ++k) {
    if (sigma_schedule[k] < 0.0 || (k > 0 && !(sigma_schedule[k] > sigma_schedule[k - 1]))) {
      throw ArgumentError("sigma_schedule must increase within [0, 1]");
    }
  }
  if (newton_max_iters < 1) throw ArgumentError("newton_max_iters must be >= 1");
  if (!(newton_tol > 0.0)) throw ArgumentError("newton_tol must be positive");
  if (!(damping > 0.0 && damping < 1.0)) throw ArgumentError("damping must lie in (0, 1)");
  if (!(linear_tol > 0.0)) throw ArgumentError("linear_tol must be positive");
  if (stop_tol < 0.0) throw ArgumentError("stop_tol must be non-negative");
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Corner simplices of every complete cell that touches the interior. Each
// simplex stands for the quarter cell at its corner v0 and carries that
// quarter's volume clipped to the domain. Along axis a its gradient is
// g_a = k_a (u_a - u_0); an edge from an interior node to a band node across
// the boundary is shortened to the crossing point, where the value is pinned
// to sigma * phi.
struct Mesh {
  int m = 0;
  double h = 0.0;
  double hm = 0.0;  // h^m
  Index simplices = 0;
  std::vector<Index> verts;     // simplices x (m+1): v0, then the axis neighbours
  std::vector<double> weight;   // simplices
  std::vector<double> k;        // simplices x m
  std::vector<double> pin_a;    // simplices x m: value replacing u_a, NaN if none
  std::vector<double> pin_0;    // simplices x m: value replacing u_0, NaN if none
  std::vector<double> field;    // simplices x m: F at the centroid
  std::vector<Index> dof;       // node -> unknown, or -1
  std::vector<Index> dof_node;  // unknown -> node
  Eigen::VectorXd H;            // H at each unknown
};

constexpr int kClipSamples = 8;   // per axis, for cut quarter cells
constexpr double kMinEdge = 0.1; // shortest edge fraction kept after a cut

double quarter_fraction(const DomainSpec& dom, const Eigen::VectorXd& v0, const double* sign,
                        double h) {
  const int m = static_cast<int>(v0.size());
  Eigen::VectorXd mid = v0;
  for (int a = 0; a < m; ++a) mid[a] += 0.25 * sign[a] * h;
  const double sd = dom.signed_distance(mid);
  const double reach = 0.25 * h * std::sqrt(static_cast<double>(m));
  if (sd <= -reach) return 1.0;
  if (sd >= reach) return 0.0;
  int total = 1;
  for (int a = 0; a < m; ++a) total *= kClipSamples;
  int in = 0;
  Eigen::VectorXd x(m);
  for (int c = 0; c < total; ++c) {
    int r = c;
    for (int a = 0; a < m; ++a) {
      x[a] = v0[a] + sign[a] * 0.5 * h * ((r % kClipSamples) + 0.5) / kClipSamples;
      r /= kClipSamples;
    }
    in += dom.contains(x);
  }
  return static_cast<double>(in) / total;
}

// Fraction t in (0, 1] of the way from an interior point to an outside point
// where the boundary is crossed.
double crossing(const DomainSpec& dom, const Eigen::VectorXd& in, const Eigen::VectorXd& out) {
  if (dom.signed_distance(out) <= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dom.signed_distance(in + mid * (out - in)) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

Mesh build_mesh(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                const BoundaryData* phi = nullptr, double sigma = 1.0, bool clip = true) {
  if (F.dim() != u.dim()) {
    throw DimensionError("field dimension " + std::to_string(F.dim()) + " vs grid dimension " +
                         std::to_string(u.dim()));
  }
  Mesh M;
  M.m = u.dim();
  M.h = u.spacing();
  M.hm = u.cell_volume();
  const int m = M.m;
  if (m > 16) throw DimensionError("solver supports m <= 16");
  const int corners = 1 << m;
  const double w = M.hm / corners;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const DomainSpec& dom = u.domain();

  M.dof.assign(static_cast<std::size_t>(u.node_count()), -1);
  for (Index i : u.interior_nodes()) {
    M.dof[i] = static_cast<Index>(M.dof_node.size());
    M.dof_node.push_back(i);
  }
  M.H.resize(static_cast<Index>(M.dof_node.size()));
  for (Index k = 0; k < M.H.size(); ++k) M.H[k] = H(u.position(M.dof_node[k]));

  const Eigen::VectorXi& shape = u.shape();
  std::vector<Index> corner(corners);
  std::vector<double> sign(m);
  for (Index c = 0; c < u.node_count(); ++c) {
    if (!u.is_active(c)) continue;
    const Eigen::VectorXi mi = u.multi_index(c);
    bool inside = true;
    for (int a = 0; a < m; ++a) inside = inside && mi[a] + 1 < shape[a];
    if (!inside) continue;
    bool complete = true, touches = false;
    for (int q = 0; q < corners && complete; ++q) {
      Index node = c;
      for (int a = 0; a < m; ++a) {
        if (q & (1 << a)) node += u.stride(a);
      }
      corner[q] = node;
      complete = u.is_active(node);
      touches = touches || u.is_interior(node);
    }
    if (!complete || !touches) continue;
    for (int q = 0; q < corners; ++q) {
      const Index v0 = corner[q];
      const Eigen::VectorXd x0 = u.position(v0);
      for (int a = 0; a < m; ++a) sign[a] = (q & (1 << a)) ? -1.0 : 1.0;
      const double frac = clip ? quarter_fraction(dom, x0, sign.data(), M.h) : 1.0;
      if (frac == 0.0) continue;
      Eigen::VectorXd centroid = x0;
      M.verts.push_back(v0);
      for (int a = 0; a < m; ++a) {
        const Index va = corner[q ^ (1 << a)];
        M.verts.push_back(va);
        centroid[a] += sign[a] * M.h / (m + 1);
        double len = 1.0, pa = nan, p0 = nan;
        if (phi && u.is_interior(v0) != u.is_interior(va)) {
          const bool out_is_a = u.is_interior(v0);
          const Eigen::VectorXd xin = u.position(out_is_a ? v0 : va);
          const Eigen::VectorXd xout = u.position(out_is_a ? va : v0);
          const double t = crossing(dom, xin, xout);
          if (t < 1.0) {
            const Eigen::VectorXd xc = dom.nearest_boundary_point(xin + t * (xout - xin));
            const double pin = sigma * (*phi)(xc);
            len = std::max(t, kMinEdge);
            (out_is_a ? pa : p0) = pin;
          }
        }
        M.k.push_back(sign[a] / (len * M.h));
        M.pin_a.push_back(pa);
        M.pin_0.push_back(p0);
      }
      const Eigen::VectorXd f = F.value(centroid);
      for (int a = 0; a < m; ++a) M.field.push_back(f[a]);
      M.weight.push_back(frac * w);
      ++M.simplices;
    }
  }
  return M;
}

// Per-simplex p = g + sigma F.
inline void local_p(const Mesh& M, const Eigen::VectorXd& vals, Index s, double sigma,
                    double* p) {
  const int m = M.m;
  const Index* v = &M.verts[s * (m + 1)];
  for (int a = 0; a < m; ++a) {
    const Index e = s * m + a;
    const double ua = std::isnan(M.pin_a[e]) ? vals[v[a + 1]] : M.pin_a[e];
    const double u0 = std::isnan(M.pin_0[e]) ? vals[v[0]] : M.pin_0[e];
    p[a] = M.k[e] * (ua - u0) + sigma * M.field[e];
  }
}

constexpr int kMaxDim = 16;

double energy(const Mesh& M, const Eigen::VectorXd& vals, double eps, double sigma) {
  std::vector<double> terms(static_cast<std::size_t>(M.simplices) + M.dof_node.size());
  double p[kMaxDim];
  for (Index s = 0; s < M.simplices; ++s) {
    local_p(M, vals, s, sigma, p);
    double q = eps * eps;
    for (int a = 0; a < M.m; ++a) q += p[a] * p[a];
    terms[s] = M.weight[s] * std::sqrt(q);
  }
  for (std::size_t k = 0; k < M.dof_node.size(); ++k) {
    terms[M.simplices + k] = M.hm * M.H[static_cast<Index>(k)] * vals[M.dof_node[k]];
  }
  return pairwise_sum(terms);
}

// dE/du over the unknowns. With eps = 0, simplices where p vanishes add nothing.
Eigen::VectorXd gradient_dofs(const Mesh& M, const Eigen::VectorXd& vals, double eps,
                              double sigma) {
  const int m = M.m;
  Eigen::VectorXd G = M.hm * M.H;
  double p[kMaxDim];
  for (Index s = 0; s < M.simplices; ++s) {
    local_p(M, vals, s, sigma, p);
    double q = eps * eps;
    for (int a = 0; a < m; ++a) q += p[a] * p[a];
    if (!(q > 0.0)) continue;
    const double scale = M.weight[s] / std::sqrt(q);
    const Index* v = &M.verts[s * (m + 1)];
    const Index d0 = M.dof[v[0]];
    for (int a = 0; a < m; ++a) {
      const double c = scale * p[a] * M.k[s * m + a];
      const Index da = M.dof[v[a + 1]];
      if (da >= 0) G[da] += c;
      if (d0 >= 0) G[d0] -= c;
    }
  }
  return G;
}

// Fixed-pattern sparse Hessian: slot[s * (m+1)^2 + k * (m+1) + l] is the
// position of entry (dof v_k, dof v_l) in valuePtr, or -1.
struct Hessian {
  SpMat K;
  std::vector<Index> slot;
};

Hessian hessian_pattern(const Mesh& M) {
  const int n = M.m + 1;
  const Index N = static_cast<Index>(M.dof_node.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(M.simplices) * n * n);
  for (Index s = 0; s < M.simplices; ++s) {
    const Index* v = &M.verts[s * n];
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const Index r = M.dof[v[k]], c = M.dof[v[l]];
        if (r >= 0 && c >= 0) trip.emplace_back(r, c, 0.0);
      }
    }
  }
  Hessian Hs;
  Hs.K.resize(N, N);
  Hs.K.setFromTriplets(trip.begin(), trip.end());
  Hs.K.makeCompressed();
  const auto* outer = Hs.K.outerIndexPtr();
  const auto* inner = Hs.K.innerIndexPtr();
  Hs.slot.assign(static_cast<std::size_t>(M.simplices) * n * n, -1);
  for (Index s = 0; s < M.simplices; ++s) {
    const Index* v = &M.verts[s * n];
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const Index r = M.dof[v[k]], c = M.dof[v[l]];
        if (r < 0 || c < 0) continue;
        const auto* lo = inner + outer[c];
        const auto* hi = inner + outer[c + 1];
        const auto* it = std::lower_bound(lo, hi, static_cast<int>(r));
        Hs.slot[(s * n + k) * n + l] = static_cast<Index>(it - inner);
      }
    }
  }
  return Hs;
}

// Local Hessian D^T A D with A = w (f^2 I - p p^T) / f^3, scattered into the
// fixed pattern.
void fill_hessian(const Mesh& M, const Eigen::VectorXd& vals, double eps, double sigma,
                  Hessian& Hs) {
  const int m = M.m, n = m + 1;
  double* values = Hs.K.valuePtr();
  std::fill(values, values + Hs.K.nonZeros(), 0.0);
  double p[kMaxDim];
  Eigen::MatrixXd A(m, m), D = Eigen::MatrixXd::Zero(m, n), L(n, n);
  for (Index s = 0; s < M.simplices; ++s) {
    local_p(M, vals, s, sigma, p);
    double q = eps * eps;
    for (int a = 0; a < m; ++a) q += p[a] * p[a];
    const double c = M.weight[s] / (q * std::sqrt(q));
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) A(a, b) = c * ((a == b ? q : 0.0) - p[a] * p[b]);
    }
    for (int a = 0; a < m; ++a) {
      D(a, 0) = -M.k[s * m + a];
      D(a, a + 1) = M.k[s * m + a];
    }
    L.noalias() = D.transpose() * A * D;
    for (int a = 0; a < m; ++a) {
      D(a, 0) = 0.0;
      D(a, a + 1) = 0.0;
    }
    const Index* slot = &Hs.slot[s * n * n];
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const Index at = slot[k * n + l];
        if (at >= 0) values[at] += L(k, l);
      }
    }
  }
}

// Linear solves with a constant sparsity pattern.
class LinearSystem {
 public:
  LinearSystem(const SpMat& K, const SolveConfig& cfg) : cfg_(cfg) {
    use_cg_ = cfg.linear_solver == LinearSolver::ConjugateGradient ||
              (cfg.linear_solver == LinearSolver::Auto && K.rows() > 400000);
    if (!use_cg_) ldlt_.analyzePattern(K);
  }

  bool solve(const SpMat& K, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
    if (use_cg_) {
      cg_.setTolerance(cfg_.linear_tol);
      cg_.setMaxIterations(std::max<Index>(1000, 10 * K.rows()));
      cg_.compute(K);
      if (cg_.info() != Eigen::Success) return false;
      x = cg_.solve(rhs);
      return cg_.info() == Eigen::Success;
    }
    ldlt_.factorize(K);
    if (ldlt_.info() != Eigen::Success) return false;
    x = ldlt_.solve(rhs);
    return ldlt_.info() == Eigen::Success && x.allFinite();
  }

 private:
  const SolveConfig& cfg_;
  bool use_cg_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>
      cg_;
};

// The gradient sup skips nodes next to the band: band values are pinned at the
// nearest boundary point, so differences reaching them are off by O(1).
void fill_stage_summary(StageDiagnostics& d, const ScalarFieldGrid& u, const VectorFieldSpec& F,
                        const CurvatureSpec& H) {
  d.sup_u = 0.0;
  d.sup_grad_u = 0.0;
  for (Index i : u.interior_nodes()) {
    d.sup_u = std::max(d.sup_u, std::abs(u[i]));
    bool clear = true;
    for (int a = 0; a < u.dim() && clear; ++a) {
      clear = u.is_interior(u.neighbor(i, a, 1)) && u.is_interior(u.neighbor(i, a, -1));
    }
    if (clear) d.sup_grad_u = std::max(d.sup_grad_u, grad_u(u, i).norm());
  }
  d.regularized_area = regularized_area(u, F, d.epsilon);
  d.p_area = p_area(u, F, H);
}

}  // namespace

double discrete_energy(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                       double eps, double sigma, const BoundaryData* phi) {
  if (eps < 0.0) throw ArgumentError("epsilon must be non-negative");
  const Mesh M = build_mesh(u, F, H, phi, sigma);
  return energy(M, u.values(), eps, sigma);
}

double discrete_p_area(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                       const BoundaryData* phi) {
  return discrete_energy(u, F, H, 0.0, 1.0, phi);
}

ScalarFieldGrid flux_residual(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                              const CurvatureSpec& H, double eps, double sigma,
                              const BoundaryData* phi) {
  if (eps < 0.0) throw ArgumentError("epsilon must be non-negative");
  const Mesh M = build_mesh(u, F, H, phi, sigma);
  const Eigen::VectorXd G = gradient_dofs(M, u.values(), eps, sigma);
  ScalarFieldGrid r = u.zeros_like();
  for (Index k = 0; k < G.size(); ++k) r[M.dof_node[k]] = -G[k];
  return r;
}

ScalarFieldGrid pde_residual(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                             const CurvatureSpec& H, double eps, double sigma) {
  if (eps < 0.0) throw ArgumentError("epsilon must be non-negative");
  if (F.dim() != u.dim()) throw DimensionError("field and grid dimensions differ");
  const int m = u.dim();
  const double h = u.spacing();
  ScalarFieldGrid r = u.zeros_like();
  Eigen::VectorXd p(m);
  // Normal component of N_eps at the half node between i and j = i + e_a.
  auto half_flux = [&](Index i, Index j, int a) {
    const Eigen::VectorXd mid = 0.5 * (u.position(i) + u.position(j));
    const Eigen::VectorXd f = sigma * F.value(mid);
    for (int b = 0; b < m; ++b) {
      if (b == a) {
        p[b] = (u[j] - u[i]) / h;
      } else {
        const Index ip = u.neighbor(i, b, 1), im = u.neighbor(i, b, -1);
        const Index jp = u.neighbor(j, b, 1), jm = u.neighbor(j, b, -1);
        p[b] = (u[ip] + u[jp] - u[im] - u[jm]) / (4.0 * h);
      }
      p[b] += f[b];
    }
    const double q = eps * eps + p.squaredNorm();
    return q > 0.0 ? p[a] / std::sqrt(q) : 0.0;
  };
  for (Index i : u.interior_nodes()) {
    double div = 0.0;
    for (int a = 0; a < m; ++a) {
      div += half_flux(i, u.neighbor(i, a, 1), a) - half_flux(u.neighbor(i, a, -1), i, a);
    }
    r[i] = div / h - H(u.position(i));
  }
  return r;
}

Assembly assemble(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                  double eps, double sigma) {
  if (!(eps > 0.0)) throw ArgumentError("assemble: epsilon must be positive");
  Assembly out{pde_residual(u, F, H, eps, sigma), {}, {}, {}};
  const int m = u.dim();
  const auto& nodes = u.interior_nodes();
  const Index n = static_cast<Index>(nodes.size());
  out.a.resize(n, m * m);
  out.b.resize(n);
  out.p.resize(m, n);
  for (Index k = 0; k < n; ++k) {
    const Eigen::VectorXd x = u.position(nodes[k]);
    const Eigen::VectorXd p = grad_u(u, nodes[k]) + sigma * F.value(x);
    const Eigen::MatrixXd J = sigma * F.jacobian(x);
    const double q = eps * eps + p.squaredNorm();
    const double f3 = q * std::sqrt(q);
    const Eigen::MatrixXd a = (q * Eigen::MatrixXd::Identity(m, m) - p * p.transpose()) / f3;
    out.a.row(k) = a.reshaped().transpose();
    // sum_IJ p_I p_J d_I F_J = p^T J p with J(J, I) = d_I F_J.
    out.b[k] = (q * J.trace() - p.dot(J * p)) / f3;
    out.p.col(k) = p;
  }
  return out;
}

SolveResult newton_solve(const ScalarFieldGrid& u0, const VectorFieldSpec& F,
                         const CurvatureSpec& H, double eps, double sigma,
                         const SolveConfig& config, const BoundaryData* phi) {
  if (!(eps > 0.0)) throw ArgumentError("newton_solve: epsilon must be positive");
  const Mesh M = build_mesh(u0, F, H, phi, sigma);
  SolveResult out(u0);
  StageDiagnostics d;
  d.epsilon = eps;
  d.sigma = sigma;

  Eigen::VectorXd& vals = out.u.values();
  double E = energy(M, vals, eps, sigma);
  Eigen::VectorXd G = gradient_dofs(M, vals, eps, sigma);
  double r = G.size() ? G.cwiseAbs().maxCoeff() / M.hm : 0.0;
  d.energy_history.push_back(E);

  Hessian Hs = hessian_pattern(M);
  std::optional<LinearSystem> lin;
  Eigen::VectorXd step;
  Eigen::VectorXd trial = vals;
  while (r > config.newton_tol) {
    if (d.iterations >= config.newton_max_iters) {
      out.message = "newton: no convergence in " + std::to_string(config.newton_max_iters) +
                    " iterations (residual " + std::to_string(r) + ")";
      break;
    }
    fill_hessian(M, vals, eps, sigma, Hs);
    if (!lin) lin.emplace(Hs.K, config);
    if (!lin->solve(Hs.K, -G, step)) {
      out.message = "newton: linear solve failed";
      break;
    }
    const double slope = G.dot(step);
    bool accepted = false;
    double E1 = E, r1 = r;
    Eigen::VectorXd G1;
    for (double alpha = 1.0; alpha > 1e-12; alpha *= config.damping) {
      trial = vals;
      for (Index k = 0; k < step.size(); ++k) trial[M.dof_node[k]] += alpha * step[k];
      E1 = energy(M, trial, eps, sigma);
      if (!std::isfinite(E1)) continue;
      G1 = gradient_dofs(M, trial, eps, sigma);
      r1 = G1.cwiseAbs().maxCoeff() / M.hm;
      const bool armijo = E1 <= E + 1e-4 * alpha * slope;
      // Near the minimum the energy change drops below its rounding error;
      // accept a step that still reduces the residual.
      const bool roundoff = r1 < r && E1 - E <= 1e-14 * std::abs(E);
      if (armijo || roundoff) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.message = "newton: line search stalled (residual " + std::to_string(r) + ")";
      break;
    }
    vals.swap(trial);
    E = E1;
    G = std::move(G1);
    r = r1;
    ++d.iterations;
    d.energy_history.push_back(E);
  }
  d.residual = r;
  d.converged = r <= config.newton_tol;
  out.converged = d.converged;
  if (!d.converged) out.failed_stage = 0;
  fill_stage_summary(d, out.u, F, H);
  d.discrete_p_area = discrete_p_area(out.u, F, H, phi);
  out.stages.push_back(std::move(d));
  return out;
}

SolveResult continuation_solve(const DomainSpec& domain, double h, const VectorFieldSpec& F,
                               const CurvatureSpec& H, const BoundaryData& phi,
                               const SolveConfig& config) {
  config.validate();
  if (F.dim() != domain.dim()) throw DimensionError("field and domain dimensions differ");
  const ScalarFieldGrid grid = build_grid(domain, h);
  const ScalarFieldGrid guess = apply_boundary(grid.zeros_like(), phi, 1.0);

  SolveResult out(guess);
  auto fail = [&](const SolveResult& stage, const std::string& where) {
    out.converged = false;
    out.failed_stage = static_cast<int>(out.stages.size()) - 1;
    out.message = where + ": " + stage.message;
    return out;
  };

  const double eps0 = config.epsilon_schedule.front();
  SolveResult first = newton_solve(guess, F, H, eps0, 1.0, config, &phi);
  if (first.converged) {
    out.stages.push_back(first.stages.front());
    out.u = std::move(first.u);
  } else {
    ScalarFieldGrid v = grid.zeros_like();
    for (double sigma : config.sigma_schedule) {
      v = apply_boundary(std::move(v), phi, sigma);
      SolveResult s = newton_solve(v, F, H, eps0, sigma, config, &phi);
      out.stages.push_back(s.stages.front());
      if (!s.converged) {
        out.u = std::move(s.u);
        return fail(s, "sigma continuation at sigma = " + std::to_string(sigma));
      }
      v = std::move(s.u);
    }
    out.u = std::move(v);
  }

  double previous = out.stages.back().p_area;
  for (std::size_t k = 1; k < config.epsilon_schedule.size(); ++k) {
    SolveResult s = newton_solve(out.u, F, H, config.epsilon_schedule[k], 1.0, config, &phi);
    out.stages.push_back(s.stages.front());
    out.u = std::move(s.u);
    if (!s.converged) {
      return fail(s, "epsilon = " + std::to_string(config.epsilon_schedule[k]));
    }
    const double pa = out.stages.back().p_area;
    if (std::abs(pa - previous) < config.stop_tol) break;
    previous = pa;
  }
  out.converged = true;
  return out;
}

ComparisonReport comparison_harness(const ScalarFieldGrid& u, const ScalarFieldGrid& v,
                                    double newton_tol) {
  if (!u.same_lattice(v)) throw ArgumentError("comparison_harness: grids differ");
  ComparisonReport r;
  r.tolerance = 10.0 * newton_tol;
  r.max_u_minus_v = -std::numeric_limits<double>::infinity();
  for (Index i : u.interior_nodes()) {
    const double d = u[i] - v[i];
    r.max_u_minus_v = std::max(r.max_u_minus_v, d);
    r.max_abs_diff = std::max(r.max_abs_diff, std::abs(d));
  }
  if (u.interior_nodes().empty()) r.max_u_minus_v = 0.0;
  r.pass = r.max_u_minus_v <= r.tolerance;
  return r;
}

std::string to_json(const SolveResult& r) {
  nlohmann::json j;
  j["converged"] = r.converged;
  j["failed_stage"] = r.failed_stage;
  j["message"] = r.message;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : r.stages) {
    j["stages"].push_back({{"epsilon", s.epsilon},
                           {"sigma", s.sigma},
                           {"iters", s.iterations},
                           {"residual", s.residual},
                           {"sup_u", s.sup_u},
                           {"sup_grad_u", s.sup_grad_u},
                           {"regularized_area", s.regularized_area},
                           {"p_area", s.p_area},
                           {"discrete_p_area", s.discrete_p_area},
                           {"converged", s.converged}});
  }
  return j.dump(2);
}

}  // namespace parea
