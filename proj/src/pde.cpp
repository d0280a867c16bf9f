#include "sabrlmm/pde.hpp"

#include <chrono>
#include <cmath>

namespace sabrlmm {

void validate(const SolverConfig& config) {
  if (!(config.theta >= 0.0 && config.theta <= 1.0))
    throw std::invalid_argument("theta outside [0,1]");
  if (config.time_steps < 1) throw std::invalid_argument("time steps must be positive");
  if (!(config.gs_tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (config.gs_max_iterations < 1) throw std::invalid_argument("max iterations must be positive");
}

namespace {

// Writes the coefficients of one state point into caller-provided storage
// (b, r, a sized m; psi sized m(m-1)/2) and returns d.
double fill_coefficients(std::span<const double> node, const PdeProblem& problem, double dt,
                         const GridSpec& spec, std::vector<double>& forwards, double* b, double* r,
                         double* a, double* psi) {
  const SabrLmmParams& par = problem.params;
  const std::size_t m = spec.dimension() - 1;
  const double v = node[m];
  const double v2 = v * v;
  const double hv = spec.width(m);

  for (std::size_t i = 0; i < m; ++i) forwards[problem.first_forward + i] = node[i];

  std::vector<double> fb(m);
  for (std::size_t i = 0; i < m; ++i) fb[i] = std::pow(std::max(node[i], 0.0), par.beta);

  for (std::size_t i = 0; i < m; ++i) {
    const int fi = problem.first_forward + int(i);
    const double hi = spec.width(i);
    const double alpha = par.alpha(fi);
    const double mu = drift(fi, forwards, v, problem.measure, par, problem.tenor);
    b[i] = dt * v2 * alpha * alpha * fb[i] * fb[i] / (2.0 * hi * hi);
    r[i] = dt * mu * fb[i] / (2.0 * hi);
    a[i] = dt * par.sigma * v2 * par.phi(fi) * alpha * fb[i] / (4.0 * hi * hv);
  }
  std::size_t q = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j, ++q) {
      const int fi = problem.first_forward + int(i);
      const int fj = problem.first_forward + int(j);
      const double rho = correlation(par.lambda, problem.tenor.date(fi), problem.tenor.date(fj));
      psi[q] = dt * v2 * rho * par.alpha(fi) * par.alpha(fj) * fb[i] * fb[j] /
               (4.0 * spec.width(i) * spec.width(j));
    }
  }
  return dt * par.sigma * par.sigma * v2 / (2.0 * hv * hv);
}

void check_problem(const GridSpec& spec, const PdeProblem& problem) {
  const std::size_t m = spec.dimension() - 1;
  if (problem.first_forward < 0 ||
      problem.first_forward + m > problem.tenor.periods())
    throw std::invalid_argument("grid forwards exceed the tenor structure");
  validate(problem.params, problem.tenor);
  if (!(problem.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

}  // namespace

PdeCoefficients coefficients_at(std::span<const double> node, const PdeProblem& problem, double dt,
                                const GridSpec& spec) {
  check_problem(spec, problem);
  if (node.size() != spec.dimension()) throw std::invalid_argument("node has wrong dimension");
  const std::size_t m = spec.dimension() - 1;
  PdeCoefficients c;
  c.b.resize(m);
  c.r.resize(m);
  c.a.resize(m);
  c.psi.resize(m > 1 ? m * (m - 1) / 2 : 0);
  std::vector<double> forwards(problem.tenor.periods(), 0.0);
  c.d = fill_coefficients(node, problem, dt, spec, forwards, c.b.data(), c.r.data(), c.a.data(),
                          c.psi.data());
  return c;
}

NodeKind node_kind(const GridSpec& spec, std::span<const int> index) {
  const std::size_t m = spec.dimension() - 1;
  for (std::size_t i = 0; i < m; ++i)
    if (index[i] == 0 || index[i] == spec.last_index(i)) return NodeKind::ForwardBoundary;
  if (index[m] == 0) return NodeKind::VolatilityFloor;
  if (index[m] == spec.last_index(m)) return NodeKind::VolatilityCap;
  return NodeKind::Interior;
}

StencilOperator::StencilOperator(const GridSpec& spec, const PdeProblem& problem, double dt)
    : spec_(spec), dt_(dt), m_(spec.dimension() - 1) {
  check_problem(spec, problem);
  const std::size_t n = spec.node_count();
  for (std::size_t i = 0; i < m_; ++i) {
    stride_.push_back(spec.stride(i));
    for (std::size_t j = i + 1; j < m_; ++j) pairs_.emplace_back(i, j);
  }
  kind_.resize(n);
  center_.assign(n, 0.0);
  d_.assign(n, 0.0);
  b_.assign(n * m_, 0.0);
  r_.assign(n * m_, 0.0);
  a_.assign(n * m_, 0.0);
  psi_.assign(n * pairs_.size(), 0.0);
  has_vol_diffusion_ = problem.params.sigma != 0.0;

  std::vector<int> index(spec.dimension());
  std::vector<double> x(spec.dimension());
  std::vector<double> forwards(problem.tenor.periods(), 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    spec.decode(p, index);
    kind_[p] = node_kind(spec, index);
    if (kind_[p] == NodeKind::ForwardBoundary) continue;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = spec.coordinate(k, index[k]);
    d_[p] = fill_coefficients(x, problem, dt, spec, forwards, &b_[p * m_], &r_[p * m_],
                              &a_[p * m_], &psi_[p * pairs_.size()]);
    if (kind_[p] == NodeKind::VolatilityFloor) continue;
    double sum_b = 0.0;
    for (std::size_t i = 0; i < m_; ++i) sum_b += b_[p * m_ + i];
    center_[p] = 2.0 * d_[p] + 2.0 * sum_b;
  }
}

ImplicitSystem::ImplicitSystem(const StencilOperator& op, double theta)
    : op_(op), theta_(theta), inverse_diagonal_(op.size()) {
  for (std::size_t p = 0; p < op.size(); ++p)
    inverse_diagonal_[p] =
        op.kind(p) == NodeKind::ForwardBoundary ? 1.0 : 1.0 / (1.0 + theta * op.center(p));
}

GridFunction apply_operator(const GridFunction& u, const PdeProblem& problem) {
  const StencilOperator op(u.spec, problem, 1.0);
  GridFunction w(u.spec);
  for (std::size_t p = 0; p < op.size(); ++p)
    if (op.kind(p) == NodeKind::Interior) w.values[Eigen::Index(p)] = op.apply(p, u.values.data());
  return w;
}

namespace {

void boundary_rows(Eigen::VectorXd& rhs, const Eigen::VectorXd& u_next,
                   const Eigen::VectorXd& u_terminal, const StencilOperator& op, double theta) {
  for (std::size_t p = 0; p < op.size(); ++p) {
    const auto i = Eigen::Index(p);
    switch (op.kind(p)) {
      case NodeKind::Interior:
        break;
      case NodeKind::ForwardBoundary:
        rhs[i] = u_terminal[i];
        break;
      case NodeKind::VolatilityFloor:
      case NodeKind::VolatilityCap:
        rhs[i] = u_next[i] + (1.0 - theta) * op.apply(p, u_next.data());
        break;
    }
  }
}

}  // namespace

void apply_boundaries(Eigen::VectorXd& rhs, const GridFunction& u_next,
                      const GridFunction& u_terminal, const StencilOperator& op, double theta) {
  if (!(u_next.spec == op.spec()) || !(u_terminal.spec == op.spec()))
    throw std::invalid_argument("apply_boundaries: grid mismatch");
  if (rhs.size() != Eigen::Index(op.size())) throw std::invalid_argument("apply_boundaries: rhs size");
  boundary_rows(rhs, u_next.values, u_terminal.values, op, theta);
}

GridFunction solve_full_grid(const GridFunction& payoff, const PdeProblem& problem,
                             const SolverConfig& config, SolveStats* stats) {
  validate(config);
  if (!payoff.values.allFinite()) throw std::invalid_argument("terminal condition is not finite");
  const double dt = problem.horizon / config.time_steps;
  const StencilOperator op(payoff.spec, problem, dt);
  const ImplicitSystem system(op, config.theta);
  const double explicit_weight = 1.0 - config.theta;

  Eigen::VectorXd u = payoff.values;
  Eigen::VectorXd rhs(u.size());
  SolveStats local;
  for (int m = config.time_steps - 1; m >= 0; --m) {
    for (std::size_t p = 0; p < op.size(); ++p)
      if (op.kind(p) == NodeKind::Interior)
        rhs[Eigen::Index(p)] = u[Eigen::Index(p)] + explicit_weight * op.apply(p, u.data());
    boundary_rows(rhs, u, payoff.values, op, config.theta);
    int sweeps = 0;
    u = gauss_seidel(system, rhs, std::move(u), config.gs_tolerance, config.gs_max_iterations, &sweeps);
    local.sweeps += sweeps;
    local.max_sweeps_per_step = std::max(local.max_sweeps_per_step, sweeps);
  }
  if (stats) *stats = local;
  return GridFunction(payoff.spec, std::move(u));
}

PricingSetup make_pricing_setup(const SwaptionSpec& swaption, const TenorStructure& tenor,
                                const MarketCurve& curve, const SabrLmmParams& params,
                                const Measure& measure, const PricingOptions& options) {
  validate(swaption, tenor);
  validate(curve, tenor);
  validate(params, tenor);
  if (measure.kind == Measure::Kind::ForwardAt && measure.index != swaption.a)
    throw std::invalid_argument("forward measure must be anchored at the swaption maturity index");
  if (measure.kind == Measure::Kind::Terminal && swaption.b != int(tenor.periods()))
    throw std::invalid_argument("terminal measure requires the swap to run to T_N");

  PricingSetup s;
  s.swaption = swaption;
  s.problem = {params, measure, tenor, swaption.a, tenor.date(swaption.a) - tenor.date(0)};
  const std::size_t m = std::size_t(swaption.forward_count());
  s.domain = SpaceDomain::standard(m, options.f_max, options.v_max);
  for (int i = swaption.a; i < swaption.b; ++i) s.spot.push_back(curve.forwards0[std::size_t(i)]);
  s.spot.push_back(params.v0);
  for (std::size_t k = 0; k < s.spot.size(); ++k)
    if (s.spot[k] < s.domain.lower[k] || s.spot[k] > s.domain.upper[k])
      throw std::invalid_argument("spot state lies outside the computational domain");
  s.numeraire = options.numeraire;
  s.discount = bond_price(std::span<const double>(curve.forwards0), 0,
                          numeraire_index(measure, tenor, options.numeraire), tenor);
  return s;
}

GridFunction terminal_condition(const GridSpec& spec, const PricingSetup& setup) {
  const TenorStructure& tenor = setup.problem.tenor;
  std::vector<double> forwards(tenor.periods(), 0.0);
  const std::size_t m = spec.dimension() - 1;
  return sample(spec, [&](std::span<const double> x) {
    for (std::size_t i = 0; i < m; ++i) forwards[setup.swaption.a + i] = x[i];
    return to_basis_points(
        numeraire_relative_payoff(forwards, setup.swaption, tenor, setup.problem.measure,
                                  setup.numeraire));
  });
}

double solve_at_spot(const std::vector<int>& levels, const PricingSetup& setup,
                     const SolverConfig& config, SolveStats* stats) {
  const GridSpec spec(levels, setup.domain);
  const GridFunction u = solve_full_grid(terminal_condition(spec, setup), setup.problem, config, stats);
  return multilinear_interpolate(u, setup.spot);
}

FullGridResult price_full_grid(int level, const SwaptionSpec& swaption, const TenorStructure& tenor,
                               const MarketCurve& curve, const SabrLmmParams& params,
                               const Measure& measure, const SolverConfig& config,
                               const PricingOptions& options) {
  const PricingSetup setup = make_pricing_setup(swaption, tenor, curve, params, measure, options);
  const int d = swaption.forward_count() + 1;
  if (d > options.max_dimension)
    throw std::invalid_argument("full grid dimension " + std::to_string(d) +
                                " exceeds the configured maximum " +
                                std::to_string(options.max_dimension));
  if (level < 0) throw std::invalid_argument("level must be non-negative");

  const auto start = std::chrono::steady_clock::now();
  FullGridResult result;
  const std::vector<int> levels(std::size_t(d), level);
  result.price_bp = setup.discount * solve_at_spot(levels, setup, config, &result.stats);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.grid_points = GridSpec(levels, setup.domain).node_count();
  return result;
}

}  // namespace sabrlmm
