#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sabrlmm/pde.hpp"

namespace sabrlmm {

struct MultiIndex {
  std::vector<int> levels;

  std::size_t dimension() const { return levels.size(); }
  int l1() const;
  int linf() const;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

// All l >= 0 with |l|_1 = s, lexicographically ascending.
std::vector<MultiIndex> enumerate_level(int d, int s);

struct CombinationEntry {
  MultiIndex index;
  int weight = 0;
};

// Grids with |l|_1 = n - q weighted (-1)^q binom(d-1, q), q = 0..d-1, largest sum first.
struct CombinationPlan {
  int level = 0;
  int dimension = 0;
  std::vector<CombinationEntry> entries;
};

CombinationPlan combination_plan(int n, int d);

// Exact node count of the union of all grids with |l|_1 <= n.
std::uint64_t sparse_point_count(int n, int d);

// Evaluates value(index) for every plan entry on a pool of `workers` threads, most expensive
// first, and returns the values in plan order. Exceptions are collected per entry.
struct EntryOutcome {
  double value = 0.0;
  double seconds = 0.0;
  std::string error;  // empty on success
  bool numerical_failure = false;
};

std::vector<EntryOutcome> evaluate_plan(const CombinationPlan& plan, int workers,
                                        const std::function<double(const MultiIndex&)>& value,
                                        const std::function<double(const MultiIndex&)>& cost);

// sum_k weight_k * values_k in plan order.
double combine(const CombinationPlan& plan, const std::vector<double>& values);

struct SubgridReport {
  MultiIndex index;
  int weight = 0;
  double spot_bp = 0.0;  // undiscounted solution at the spot
  std::size_t nodes = 0;
  double seconds = 0.0;
};

struct SparseResult {
  double price_bp = 0.0;
  std::uint64_t sparse_points = 0;
  std::size_t subgrid_nodes = 0;  // sum over all combined grids
  double seconds = 0.0;
  std::vector<SubgridReport> grids;
};

// One or more subgrid solves failed. what() lists every failure.
class SparseFailure : public std::runtime_error {
 public:
  SparseFailure(const std::string& message, bool numerical)
      : std::runtime_error(message), numerical_(numerical) {}
  bool numerical() const { return numerical_; }

 private:
  bool numerical_;
};

SparseResult price_sparse(int n, const SwaptionSpec& swaption, const TenorStructure& tenor,
                          const MarketCurve& curve, const SabrLmmParams& params,
                          const Measure& measure, const SolverConfig& config, int workers,
                          const PricingOptions& options = {});

}  // namespace sabrlmm
