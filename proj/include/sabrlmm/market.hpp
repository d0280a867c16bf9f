#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sabrlmm {

constexpr double kBasisPoint = 1e-4;

// Payment dates T_0 < ... < T_N (year fractions) and accruals tau_i = T_{i+1} - T_i.
struct TenorStructure {
  std::vector<double> dates;
  std::vector<double> accruals;

  // N: number of accrual periods, also the number of forwards F_0..F_{N-1}.
  std::size_t periods() const { return accruals.size(); }
  double date(int i) const { return dates.at(static_cast<std::size_t>(i)); }
  double accrual(int i) const { return accruals.at(static_cast<std::size_t>(i)); }
};

// Builds a tenor from its dates; throws std::invalid_argument unless strictly increasing.
TenorStructure make_tenor(std::vector<double> dates);

// T_i = i for i = 0..periods.
TenorStructure annual_tenor(std::size_t periods);

// Initial forwards F_i(0) and Black volatilities, one per accrual period (F_0 is the
// deterministic first forward and carries volatility 0).
struct MarketCurve {
  std::vector<double> forwards0;
  std::vector<double> black_vols;
};

void validate(const MarketCurve& curve, const TenorStructure& tenor);

// EURIBOR market data of 27 July 2004 (nine annual periods starting 29-07-04).
MarketCurve reference_curve();
TenorStructure reference_tenor();

// European T_a x (T_b - T_a) payer swaption with fixed rate `strike`.
struct SwaptionSpec {
  int a = 1;
  int b = 2;
  double strike = 0.055;

  int forward_count() const { return b - a; }
};

void validate(const SwaptionSpec& spec, const TenorStructure& tenor);

// Standard normal distribution function.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Black's formula Bl(K, F, nu) = F Phi(d1) - K Phi(d2), nu the total volatility.
template <typename Scalar>
Scalar black_price(Scalar strike, Scalar forward, Scalar total_vol) {
  using std::log;
  using std::max;
  if (!(strike > Scalar(0)) || !(forward > Scalar(0)) || total_vol < Scalar(0))
    throw std::domain_error("black_price: requires K > 0, F > 0, nu >= 0");
  if (total_vol == Scalar(0)) return max(forward - strike, Scalar(0));
  const Scalar d1 = (log(forward / strike) + Scalar(0.5) * total_vol * total_vol) / total_vol;
  const Scalar d2 = d1 - total_vol;
  return forward * Scalar(norm_cdf(double(d1))) - strike * Scalar(norm_cdf(double(d2)));
}

// P(T_i, T_j) = prod_{k=i}^{j-1} 1 / (1 + tau_k F_k). `forwards` is indexed by absolute
// forward index (forwards[k] = F_k); entries outside [i, j) are ignored.
template <typename Scalar>
Scalar bond_price(std::span<const Scalar> forwards, int i, int j, const TenorStructure& tenor) {
  if (i > j) throw std::invalid_argument("bond_price: requires i <= j");
  if (j > static_cast<int>(forwards.size()) || j > static_cast<int>(tenor.periods()))
    throw std::out_of_range("bond_price: forward index beyond tenor");
  Scalar discount(1);
  for (int k = i; k < j; ++k) {
    const Scalar growth = Scalar(1) + Scalar(tenor.accrual(k)) * forwards[k];
    if (!(growth > Scalar(0)))
      throw std::domain_error("bond_price: 1 + tau*F <= 0 (forward below -1/tau)");
    discount /= growth;
  }
  return discount;
}

// (sum_{i=a}^{b-1} P(T_a, T_{i+1}) tau_i (F_i - K))^+ evaluated at T_a, i.e. the payoff
// relative to the numeraire P(T_a, T_a) = 1.
double swaption_payoff(std::span<const double> forwards, const SwaptionSpec& spec,
                       const TenorStructure& tenor);

// P(T_0, T_{i+1}) tau_i Bl(K, F_i(0), sigma_i sqrt(T_i - T_0)) in decimal units.
double caplet_black_value(const MarketCurve& curve, const TenorStructure& tenor, int i,
                          double strike);

inline double to_basis_points(double value) { return value / kBasisPoint; }

}  // namespace sabrlmm
