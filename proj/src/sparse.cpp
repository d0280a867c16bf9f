#include "sabrlmm/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <sstream>
#include <thread>

namespace sabrlmm {

int MultiIndex::l1() const { return std::accumulate(levels.begin(), levels.end(), 0); }

int MultiIndex::linf() const {
  return levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
}

namespace {

void enumerate_into(std::vector<int>& prefix, std::size_t k, int remaining,
                    std::vector<MultiIndex>& out) {
  if (k + 1 == prefix.size()) {
    prefix[k] = remaining;
    out.push_back({prefix});
    return;
  }
  for (int l = 0; l <= remaining; ++l) {
    prefix[k] = l;
    enumerate_into(prefix, k + 1, remaining - l, out);
  }
}

long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("sparse point count overflows");
  return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("sparse point count overflows");
  return r;
}

}  // namespace

std::vector<MultiIndex> enumerate_level(int d, int s) {
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  if (s < 0) throw std::invalid_argument("level sum must be non-negative");
  std::vector<MultiIndex> out;
  std::vector<int> prefix(std::size_t(d), 0);
  enumerate_into(prefix, 0, s, out);
  return out;
}

CombinationPlan combination_plan(int n, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  if (n < d - 1)
    throw std::invalid_argument("sparse level " + std::to_string(n) + " is below d - 1 = " +
                                std::to_string(d - 1));
  CombinationPlan plan{n, d, {}};
  for (int q = 0; q < d; ++q) {
    const int weight = int((q % 2 ? -1 : 1) * binomial(d - 1, q));
    for (MultiIndex& l : enumerate_level(d, n - q)) plan.entries.push_back({std::move(l), weight});
  }
  return plan;
}

// A node first appears at level 0 (the two end points) or at level k >= 1 (2^{k-1} new
// midpoints). A node of the tensor grid is in the union iff its per-dimension first-appearance
// levels sum to at most n, so the count is the coefficient sum of a d-fold convolution.
std::uint64_t sparse_point_count(int n, int d) {
  if (n < 0) throw std::invalid_argument("sparse level must be non-negative");
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  std::vector<std::uint64_t> fresh(std::size_t(n) + 1);
  fresh[0] = 2;
  for (int k = 1; k <= n; ++k) fresh[std::size_t(k)] = std::uint64_t(1) << (k - 1);

  std::vector<std::uint64_t> count(std::size_t(n) + 1, 0);
  count[0] = 1;
  for (int dim = 0; dim < d; ++dim) {
    std::vector<std::uint64_t> next(count.size(), 0);
    for (std::size_t s = 0; s < count.size(); ++s)
      for (std::size_t k = 0; s + k < count.size(); ++k)
        next[s + k] = checked_add(next[s + k], checked_mul(count[s], fresh[k]));
    count = std::move(next);
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : count) total = checked_add(total, c);
  return total;
}

std::vector<EntryOutcome> evaluate_plan(const CombinationPlan& plan, int workers,
                                        const std::function<double(const MultiIndex&)>& value,
                                        const std::function<double(const MultiIndex&)>& cost) {
  const std::size_t count = plan.entries.size();
  std::vector<double> costs(count);
  for (std::size_t i = 0; i < count; ++i) costs[i] = cost(plan.entries[i].index);
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return costs[x] > costs[y]; });

  std::vector<EntryOutcome> outcomes(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      const std::size_t i = order[k];
      EntryOutcome& out = outcomes[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        out.value = value(plan.entries[i].index);
      } catch (const NonConvergence& e) {
        out.error = e.what();
        out.numerical_failure = true;
      } catch (const std::domain_error& e) {
        out.error = e.what();
        out.numerical_failure = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const std::size_t pool = std::min<std::size_t>(std::size_t(std::max(workers, 1)), count);
  if (pool <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(work);
  }
  return outcomes;
}

double combine(const CombinationPlan& plan, const std::vector<double>& values) {
  if (values.size() != plan.entries.size())
    throw std::invalid_argument("one value per plan entry required");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += plan.entries[i].weight * values[i];
  return sum;
}

SparseResult price_sparse(int n, const SwaptionSpec& swaption, const TenorStructure& tenor,
                          const MarketCurve& curve, const SabrLmmParams& params,
                          const Measure& measure, const SolverConfig& config, int workers,
                          const PricingOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const PricingSetup setup = make_pricing_setup(swaption, tenor, curve, params, measure, options);
  validate(config);
  const int d = swaption.forward_count() + 1;
  const CombinationPlan plan = combination_plan(n, d);

  auto nodes = [&](const MultiIndex& l) { return GridSpec(l.levels, setup.domain).node_count(); };
  const auto outcomes = evaluate_plan(
      plan, workers, [&](const MultiIndex& l) { return solve_at_spot(l.levels, setup, config); },
      [&](const MultiIndex& l) { return double(nodes(l)) * config.time_steps; });

  std::ostringstream failures;
  int failed = 0;
  bool numerical = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error.empty()) continue;
    ++failed;
    numerical = numerical || outcomes[i].numerical_failure;
    failures << "\n  grid (";
    for (std::size_t k = 0; k < plan.entries[i].index.levels.size(); ++k)
      failures << (k ? "," : "") << plan.entries[i].index.levels[k];
    failures << "): " << outcomes[i].error;
  }
  if (failed)
    throw SparseFailure(std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                            " subgrid solves failed:" + failures.str(),
                        numerical);

  SparseResult result;
  std::vector<double> values;
  values.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    values.push_back(outcomes[i].value);
    const std::size_t count = nodes(plan.entries[i].index);
    result.subgrid_nodes += count;
    result.grids.push_back(
        {plan.entries[i].index, plan.entries[i].weight, outcomes[i].value, count, outcomes[i].seconds});
  }
  result.price_bp = setup.discount * combine(plan, values);
  result.sparse_points = sparse_point_count(n, d);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sabrlmm
