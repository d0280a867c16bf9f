#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sabrlmm/grid.hpp"
#include "sabrlmm/market.hpp"
#include "sabrlmm/model.hpp"

namespace sabrlmm {

struct SolverConfig {
  double theta = 0.5;
  int time_steps = 256;
  double gs_tolerance = 1e-6;
  int gs_max_iterations = 100000;
};

void validate(const SolverConfig& config);

// The backward problem on a grid whose first dimensions are the forwards
// F_first, ..., F_{first+m-1} and whose last dimension is the volatility V.
struct PdeProblem {
  SabrLmmParams params;
  Measure measure;
  TenorStructure tenor;
  int first_forward = 1;
  double horizon = 1.0;  // time to expiry of the terminal condition
};

// Discretization coefficients of one node; psi holds the pairs i < j in lexicographic order.
struct PdeCoefficients {
  double d = 0.0;
  std::vector<double> b;
  std::vector<double> r;
  std::vector<double> a;
  std::vector<double> psi;
};

// Coefficients at the state point `node` = (F_first, ..., V) for time step dt.
PdeCoefficients coefficients_at(std::span<const double> node, const PdeProblem& problem, double dt,
                                const GridSpec& spec);

enum class NodeKind : std::uint8_t {
  Interior,
  ForwardBoundary,  // some f_i = 0 or M_i: Dirichlet, pinned to the terminal condition
  VolatilityFloor,  // V = 0: PDE reduced to its drift part
  VolatilityCap,    // V = V_max: ghost point with dU/dV = 0
};

NodeKind node_kind(const GridSpec& spec, std::span<const int> index);

// Matrix-free discrete operator L = dt * W with the volatility boundary closures built in.
// Each row is L(x)_p = offdiag(x)_p - center_p x_p.
class StencilOperator {
 public:
  StencilOperator(const GridSpec& spec, const PdeProblem& problem, double dt);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return kind_.size(); }
  NodeKind kind(std::size_t p) const { return kind_[p]; }
  double center(std::size_t p) const { return center_[p]; }
  double dt() const { return dt_; }

  double off_diagonal(std::size_t p, const double* x) const {
    switch (kind_[p]) {
      case NodeKind::ForwardBoundary:
        return 0.0;
      case NodeKind::VolatilityFloor:
        return drift_terms(p, x);
      case NodeKind::VolatilityCap:
        return forward_terms(p, x) + forward_cross_terms(p, x) + 2.0 * d_[p] * x[p - 1];
      case NodeKind::Interior:
        break;
    }
    // x[p - 1] is the row Gauss-Seidel updated last; it enters the sum last.
    const double far = forward_terms(p, x) + vol_cross_terms(p, x) + forward_cross_terms(p, x);
    if (!has_vol_diffusion_) return far;
    return far + d_[p] * x[p + 1] + d_[p] * x[p - 1];
  }

  double apply(std::size_t p, const double* x) const {
    return kind_[p] == NodeKind::ForwardBoundary ? 0.0 : off_diagonal(p, x) - center_[p] * x[p];
  }

 private:
  double drift_terms(std::size_t p, const double* x) const {
    double s = 0.0;
    const double* r = &r_[p * m_];
    for (std::size_t i = 0; i < m_; ++i) s += r[i] * (x[p + stride_[i]] - x[p - stride_[i]]);
    return s;
  }
  double forward_terms(std::size_t p, const double* x) const {
    double s = 0.0;
    const double* b = &b_[p * m_];
    const double* r = &r_[p * m_];
    for (std::size_t i = 0; i < m_; ++i)
      s += (b[i] + r[i]) * x[p + stride_[i]] + (b[i] - r[i]) * x[p - stride_[i]];
    return s;
  }
  double vol_cross_terms(std::size_t p, const double* x) const {
    if (!has_vol_diffusion_) return 0.0;
    double s = 0.0;
    const double* a = &a_[p * m_];
    for (std::size_t i = 0; i < m_; ++i) {
      const std::ptrdiff_t up = stride_[i] + 1;
      const std::ptrdiff_t skew = stride_[i] - 1;
      s += a[i] * (x[p + up] + x[p - up] - x[p + skew] - x[p - skew]);
    }
    return s;
  }
  double forward_cross_terms(std::size_t p, const double* x) const {
    if (pairs_.empty()) return 0.0;
    double s = 0.0;
    const double* psi = &psi_[p * pairs_.size()];
    for (std::size_t q = 0; q < pairs_.size(); ++q) {
      const std::ptrdiff_t up = stride_[pairs_[q].first] + stride_[pairs_[q].second];
      const std::ptrdiff_t skew = stride_[pairs_[q].first] - stride_[pairs_[q].second];
      s += psi[q] * (x[p + up] + x[p - up] - x[p + skew] - x[p - skew]);
    }
    return s;
  }

  GridSpec spec_;
  double dt_;
  std::size_t m_;  // forward dimensions
  std::vector<std::ptrdiff_t> stride_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<NodeKind> kind_;
  std::vector<double> center_;
  std::vector<double> d_;
  std::vector<double> b_;
  std::vector<double> r_;
  std::vector<double> a_;
  std::vector<double> psi_;
  bool has_vol_diffusion_ = false;  // sigma != 0; otherwise d and a vanish everywhere
};

// W(U) on interior nodes (every stencil neighbour exists); zero on all boundary nodes.
GridFunction apply_operator(const GridFunction& u, const PdeProblem& problem);

// Right-hand side rows of the boundary nodes for the step U^{m+1} -> U^m:
// forward boundaries pinned to U_terminal, V = 0 and V = V_max rows from the reduced and
// ghost-point schemes. Interior rows of `rhs` are left untouched.
void apply_boundaries(Eigen::VectorXd& rhs, const GridFunction& u_next,
                      const GridFunction& u_terminal, const StencilOperator& op, double theta);

// A linear system visited row by row: diagonal(i) x_i + off_diagonal_product(i, x) = rhs_i.
template <typename S>
concept RowSystem = requires(const S& s, std::size_t i, const Eigen::VectorXd& x) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s.diagonal(i) } -> std::convertible_to<double>;
  { s.off_diagonal_product(i, x) } -> std::convertible_to<double>;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double last_update)
      : std::runtime_error("Gauss-Seidel did not converge after " + std::to_string(iterations) +
                           " sweeps (last update " + std::to_string(last_update) + ")"),
        iterations_(iterations),
        last_update_(last_update) {}
  int iterations() const { return iterations_; }
  double last_update() const { return last_update_; }

 private:
  int iterations_;
  double last_update_;
};

// Lexicographic Gauss-Seidel; stops once the max-norm of a sweep's update drops below tol.
template <RowSystem S>
Eigen::VectorXd gauss_seidel(const S& system, const Eigen::VectorXd& rhs, Eigen::VectorXd x,
                             double tol, int max_iterations, int* sweeps = nullptr) {
  const std::size_t n = system.size();
  double update = 0.0;
  for (int sweep = 1; sweep <= max_iterations; ++sweep) {
    update = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double residual = rhs[Eigen::Index(i)] - system.off_diagonal_product(i, x);
      double xi;
      if constexpr (requires { system.inverse_diagonal(i); })
        xi = residual * system.inverse_diagonal(i);
      else
        xi = residual / system.diagonal(i);
      update = std::max(update, std::abs(xi - x[Eigen::Index(i)]));
      x[Eigen::Index(i)] = xi;
    }
    if (update < tol) {
      if (sweeps) *sweeps = sweep;
      return x;
    }
  }
  throw NonConvergence(max_iterations, update);
}

// (I - theta L) x = rhs with Dirichlet rows reduced to x_p = rhs_p.
class ImplicitSystem {
 public:
  ImplicitSystem(const StencilOperator& op, double theta);
  std::size_t size() const { return op_.size(); }
  double diagonal(std::size_t p) const { return 1.0 / inverse_diagonal_[p]; }
  double inverse_diagonal(std::size_t p) const { return inverse_diagonal_[p]; }
  double off_diagonal_product(std::size_t p, const Eigen::VectorXd& x) const {
    return -theta_ * op_.off_diagonal(p, x.data());
  }

 private:
  const StencilOperator& op_;
  double theta_;
  std::vector<double> inverse_diagonal_;
};

struct SolveStats {
  long long sweeps = 0;
  int max_sweeps_per_step = 0;
};

// Marches the theta-scheme from the terminal condition at `problem.horizon` back to t = 0.
GridFunction solve_full_grid(const GridFunction& payoff, const PdeProblem& problem,
                             const SolverConfig& config, SolveStats* stats = nullptr);

// ---------------------------------------------------------------------------------------
// Swaption pricing on a single grid.

struct PricingOptions {
  double f_max = 0.1;
  double v_max = 3.5;
  int max_dimension = 5;
  NumeraireConvention numeraire = NumeraireConvention::Consistent;
};

// Everything a solver needs to price `swaption`: the PDE problem, the spot point at which
// the solution is read, and the numeraire discount P(0, T_num).
struct PricingSetup {
  PdeProblem problem;
  SwaptionSpec swaption;
  std::vector<double> spot;
  double discount = 1.0;
  NumeraireConvention numeraire = NumeraireConvention::Consistent;
  SpaceDomain domain;
};

PricingSetup make_pricing_setup(const SwaptionSpec& swaption, const TenorStructure& tenor,
                                const MarketCurve& curve, const SabrLmmParams& params,
                                const Measure& measure, const PricingOptions& options = {});

// Terminal condition in basis points relative to the measure's numeraire.
GridFunction terminal_condition(const GridSpec& spec, const PricingSetup& setup);

// Solves on `levels` and returns the undiscounted solution at the spot, in basis points.
double solve_at_spot(const std::vector<int>& levels, const PricingSetup& setup,
                     const SolverConfig& config, SolveStats* stats = nullptr);

struct FullGridResult {
  double price_bp = 0.0;
  std::size_t grid_points = 0;
  double seconds = 0.0;
  SolveStats stats;
};

FullGridResult price_full_grid(int level, const SwaptionSpec& swaption, const TenorStructure& tenor,
                               const MarketCurve& curve, const SabrLmmParams& params,
                               const Measure& measure, const SolverConfig& config,
                               const PricingOptions& options = {});

}  // namespace sabrlmm
