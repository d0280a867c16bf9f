#include "sabrlmm/market.hpp"

#include <algorithm>
#include <string>

namespace sabrlmm {

TenorStructure make_tenor(std::vector<double> dates) {
  if (dates.size() < 2) throw std::invalid_argument("tenor needs at least two dates");
  TenorStructure tenor;
  tenor.accruals.reserve(dates.size() - 1);
  for (std::size_t i = 0; i + 1 < dates.size(); ++i) {
    const double tau = dates[i + 1] - dates[i];
    if (!(tau > 0.0)) throw std::invalid_argument("tenor dates must be strictly increasing");
    tenor.accruals.push_back(tau);
  }
  tenor.dates = std::move(dates);
  return tenor;
}

TenorStructure annual_tenor(std::size_t periods) {
  std::vector<double> dates(periods + 1);
  for (std::size_t i = 0; i <= periods; ++i) dates[i] = static_cast<double>(i);
  return make_tenor(std::move(dates));
}

void validate(const MarketCurve& curve, const TenorStructure& tenor) {
  const auto n = tenor.periods();
  if (curve.forwards0.size() != n || curve.black_vols.size() != n)
    throw std::invalid_argument("market curve needs one forward and one volatility per period (" +
                                std::to_string(n) + ")");
  if (std::any_of(curve.forwards0.begin(), curve.forwards0.end(), [](double f) { return !(f >= 0.0); }))
    throw std::invalid_argument("initial forwards must be non-negative");
  if (std::any_of(curve.black_vols.begin(), curve.black_vols.end(), [](double v) { return !(v >= 0.0); }))
    throw std::invalid_argument("black volatilities must be non-negative");
}

MarketCurve reference_curve() {
  return {
      {0.02423306, 0.03281384, 0.03931690, 0.04364818, 0.04680236, 0.04933085, 0.05135066,
       0.05273314, 0.05376115},
      {0.0, 0.2473, 0.2245, 0.1936, 0.1743, 0.1615, 0.1502, 0.1424, 0.1342},
  };
}

TenorStructure reference_tenor() { return annual_tenor(9); }

void validate(const SwaptionSpec& spec, const TenorStructure& tenor) {
  if (!(0 < spec.a && spec.a < spec.b && spec.b <= static_cast<int>(tenor.periods())))
    throw std::invalid_argument("swaption indices must satisfy 0 < a < b <= N");
  if (!(spec.strike > 0.0)) throw std::invalid_argument("swaption strike must be positive");
}

double swaption_payoff(std::span<const double> forwards, const SwaptionSpec& spec,
                       const TenorStructure& tenor) {
  double swap = 0.0;
  for (int i = spec.a; i < spec.b; ++i)
    swap += bond_price(forwards, spec.a, i + 1, tenor) * tenor.accrual(i) * (forwards[i] - spec.strike);
  return std::max(swap, 0.0);
}

double caplet_black_value(const MarketCurve& curve, const TenorStructure& tenor, int i,
                          double strike) {
  if (i < 1 || i >= static_cast<int>(tenor.periods()))
    throw std::out_of_range("caplet index must lie in [1, N-1]");
  const std::span<const double> f0(curve.forwards0);
  const double discount = bond_price(f0, 0, i + 1, tenor);
  const double nu = curve.black_vols.at(i) * std::sqrt(tenor.date(i) - tenor.date(0));
  return discount * tenor.accrual(i) * black_price(strike, f0[i], nu);
}

}  // namespace sabrlmm
