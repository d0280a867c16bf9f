#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sabrlmm/market.hpp"
#include "sabrlmm/model.hpp"

namespace sabrlmm {

enum class McScheme {
  LogEuler,             // beta = 1 only
  EulerFullTruncation,  // any beta; negative forwards and V are truncated at 0 in the coefficients
};

struct McConfig {
  std::int64_t paths = 1'000'000;
  int steps_per_year = 256;
  std::uint64_t seed = 20240101;
  McScheme scheme = McScheme::LogEuler;
  int workers = 1;
  NumeraireConvention numeraire = NumeraireConvention::Consistent;
};

struct McResult {
  double mean_bp = 0.0;
  double half_width_bp = 0.0;  // 1.96 sample std / sqrt(paths); NaN when paths == 1
  double ci_low_bp = 0.0;
  double ci_high_bp = 0.0;
  std::int64_t paths = 0;
  double seconds = 0.0;

  bool has_interval() const { return paths > 1; }
};

// Forwards are indexed absolutely (size N); only first..first+count-1 are evolved.
struct McState {
  std::vector<double> forwards;
  double vol = 1.0;
};

// Advances `state` by dt. `increments` holds the correlated Brownian increments
// (dW_first, ..., dW_{first+count-1}, dZ) with covariance joint_correlation * dt.
// Drifts are evaluated at the state at the start of the step.
void simulate_step(McState& state, int first, int count, double dt,
                   std::span<const double> increments, const SabrLmmParams& params,
                   const Measure& measure, const TenorStructure& tenor, McScheme scheme);

// Paths are grouped in fixed-size blocks, each with its own generator seeded from
// (seed, block index), and reduced in block order. The result therefore does not depend on
// the worker count.
McResult estimate_price(const SwaptionSpec& swaption, const TenorStructure& tenor,
                        const MarketCurve& curve, const SabrLmmParams& params,
                        const Measure& measure, const McConfig& config);

inline constexpr std::int64_t kMcBlockPaths = 8192;

}  // namespace sabrlmm
