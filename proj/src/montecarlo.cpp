#include "sabrlmm/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace sabrlmm {

namespace {

constexpr int kMaxForwards = 64;

// Running mean and sum of squared deviations; merged with Chan's update.
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / double(n);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    const double total = double(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * double(o.n) / total;
    m2 += o.m2 + delta * delta * double(n) * double(o.n) / total;
    n += o.n;
  }
};

}  // namespace

void simulate_step(McState& state, int first, int count, double dt,
                   std::span<const double> increments, const SabrLmmParams& params,
                   const Measure& measure, const TenorStructure& tenor, McScheme scheme) {
  if (count > kMaxForwards) throw std::invalid_argument("too many simulated forwards");
  const double v = state.vol;
  std::array<double, kMaxForwards> mu{};
  for (int k = 0; k < count; ++k)
    mu[std::size_t(k)] = drift(first + k, state.forwards, v, measure, params, tenor);

  const double dz = increments[std::size_t(count)];
  for (int k = 0; k < count; ++k) {
    double& f = state.forwards[std::size_t(first + k)];
    const double alpha = params.alpha(first + k);
    const double dw = increments[std::size_t(k)];
    if (scheme == McScheme::LogEuler) {
      f *= std::exp((mu[std::size_t(k)] - 0.5 * alpha * alpha * v * v) * dt + alpha * v * dw);
    } else {
      const double local = std::pow(std::max(f, 0.0), params.beta);
      f += mu[std::size_t(k)] * local * dt + alpha * v * local * dw;
    }
  }
  if (params.sigma == 0.0) return;
  if (scheme == McScheme::LogEuler)
    state.vol = v * std::exp(-0.5 * params.sigma * params.sigma * dt + params.sigma * dz);
  else
    state.vol = std::max(v + params.sigma * v * dz, 0.0);
}

McResult estimate_price(const SwaptionSpec& swaption, const TenorStructure& tenor,
                        const MarketCurve& curve, const SabrLmmParams& params,
                        const Measure& measure, const McConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  validate(swaption, tenor);
  validate(curve, tenor);
  validate(params, tenor);
  if (config.paths < 1) throw std::invalid_argument("paths must be at least 1");
  if (config.steps_per_year < 1) throw std::invalid_argument("steps per year must be at least 1");
  if (measure.kind == Measure::Kind::ForwardAt && measure.index != swaption.a)
    throw std::invalid_argument("forward measure must be anchored at the swaption maturity index");
  if (measure.kind == Measure::Kind::Terminal && swaption.b != int(tenor.periods()))
    throw std::invalid_argument("terminal measure requires the swap to run to T_N");

  const int first = swaption.a;
  const int count = swaption.forward_count();
  if (count > kMaxForwards) throw std::invalid_argument("too many simulated forwards");
  if (config.scheme == McScheme::LogEuler) {
    if (params.beta != 1.0) throw std::invalid_argument("log-Euler scheme requires beta = 1");
    for (int i = first; i < first + count; ++i)
      if (!(curve.forwards0[std::size_t(i)] > 0.0))
        throw std::invalid_argument("log-Euler scheme requires positive initial forwards");
  }

  const double horizon = tenor.date(swaption.a) - tenor.date(0);
  const int steps = std::max(1, int(std::ceil(config.steps_per_year * horizon - 1e-9)));
  const double dt = horizon / steps;
  const Eigen::MatrixXd factor =
      correlation_factor(joint_correlation(params, tenor, first, count)) * std::sqrt(dt);
  const std::size_t dim = std::size_t(count) + 1;
  const double discount = bond_price(std::span<const double>(curve.forwards0), 0,
                                     numeraire_index(measure, tenor, config.numeraire), tenor);

  const std::int64_t blocks = (config.paths + kMcBlockPaths - 1) / kMcBlockPaths;
  std::vector<Moments> partial(static_cast<std::size_t>(blocks));

  auto run_block = [&](std::int64_t block) {
    const auto b = std::uint64_t(block);
    std::seed_seq seq{std::uint32_t(config.seed), std::uint32_t(config.seed >> 32),
                      std::uint32_t(b), std::uint32_t(b >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    const std::int64_t begin = block * kMcBlockPaths;
    const std::int64_t end = std::min(config.paths, begin + kMcBlockPaths);

    std::vector<double> z(dim), inc(dim);
    McState state;
    Moments& m = partial[std::size_t(block)];
    for (std::int64_t p = begin; p < end; ++p) {
      state.forwards = curve.forwards0;
      state.vol = params.v0;
      for (int s = 0; s < steps; ++s) {
        for (double& x : z) x = normal(rng);
        for (std::size_t r = 0; r < dim; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < dim; ++c) acc += factor(Eigen::Index(r), Eigen::Index(c)) * z[c];
          inc[r] = acc;
        }
        simulate_step(state, first, count, dt, inc, params, measure, tenor, config.scheme);
      }
      m.add(to_basis_points(
          numeraire_relative_payoff(state.forwards, swaption, tenor, measure, config.numeraire)));
    }
  };

  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t k = next++; k < blocks; k = next++) run_block(k);
  };
  const std::int64_t pool = std::min<std::int64_t>(std::max(config.workers, 1), blocks);
  if (pool <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (std::int64_t t = 0; t < pool; ++t) threads.emplace_back(work);
  }

  Moments total;
  for (const Moments& m : partial) total.merge(m);

  McResult r;
  r.paths = total.n;
  r.mean_bp = discount * total.mean;
  if (total.n > 1) {
    const double std_dev = std::sqrt(total.m2 / double(total.n - 1));
    r.half_width_bp = 1.96 * discount * std_dev / std::sqrt(double(total.n));
  } else {
    r.half_width_bp = std::numeric_limits<double>::quiet_NaN();
  }
  r.ci_low_bp = r.mean_bp - (r.has_interval() ? r.half_width_bp : 0.0);
  r.ci_high_bp = r.mean_bp + (r.has_interval() ? r.half_width_bp : 0.0);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace sabrlmm
