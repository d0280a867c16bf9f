#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sabrlmm/market.hpp"

namespace sabrlmm {

// SABR/LMM dynamics:
//   dF_i = mu_i F_i^beta dt + alpha_i V F_i^beta dW_i,   dV = sigma V dZ,
//   <dW_i, dW_j> = rho_ij dt,  <dW_i, dZ> = phi_i dt.
// alphas and phis are indexed by absolute forward index, like MarketCurve.
struct SabrLmmParams {
  double beta = 1.0;
  std::vector<double> alphas;
  double sigma = 0.0;
  std::vector<double> phis;
  double lambda = 0.1;
  double v0 = 1.0;

  double alpha(int i) const { return alphas.at(static_cast<std::size_t>(i)); }
  double phi(int i) const { return phis.at(static_cast<std::size_t>(i)); }
};

void validate(const SabrLmmParams& params, const TenorStructure& tenor);

// alpha_i = Black volatility of the curve, constant phi, V(0) = 1.
SabrLmmParams params_from_curve(const MarketCurve& curve, double beta, double sigma, double phi,
                                double lambda);

// Pricing measure; selects the drift of the forwards.
struct Measure {
  enum class Kind { Terminal, ForwardAt };
  Kind kind = Kind::Terminal;
  int index = 0;

  static Measure terminal() { return {Kind::Terminal, 0}; }
  static Measure forward_at(int a) { return {Kind::ForwardAt, a}; }

  friend bool operator==(const Measure&, const Measure&) = default;
};

// Which bond a ForwardAt(a) price is taken relative to.
//   Consistent: P(t, T_{a+1}), the numeraire under which F_a is driftless, as the drift assumes.
//     The 1x1 price then equals the Black caplet value.
//   ExpiryBond: P(t, T_a) with the same drifts. Not arbitrage-free (the F_a drift is missing),
//     about 3% below Consistent on the reference curve; kept to reproduce published swaption
//     tables computed this way.
// Terminal always uses P(t, T_N).
enum class NumeraireConvention { Consistent, ExpiryBond };

int numeraire_index(const Measure& measure, const TenorStructure& tenor,
                    NumeraireConvention convention = NumeraireConvention::Consistent);

// rho_ij = exp(-lambda |T_i - T_j|).
inline double correlation(double lambda, double ti, double tj) {
  return std::exp(-lambda * std::abs(ti - tj));
}

// Drift coefficient mu_i of forward i at state (F, V). `forwards` is indexed by absolute
// forward index; only the entries the summation touches are read.
double drift(int i, std::span<const double> forwards, double vol, const Measure& measure,
             const SabrLmmParams& params, const TenorStructure& tenor);

// Correlation of (W_first, ..., W_{first+count-1}, Z): rho block plus a final row/column of
// phi. Throws std::domain_error if the matrix is not positive semidefinite.
Eigen::MatrixXd joint_correlation(const SabrLmmParams& params, const TenorStructure& tenor,
                                  int first, int count);

// Swaption payoff at T_a divided by P(T_a, T_num), num = numeraire_index(measure, convention).
// This is the terminal condition of the numeraire-relative price under `measure`.
double numeraire_relative_payoff(std::span<const double> forwards, const SwaptionSpec& spec,
                                 const TenorStructure& tenor, const Measure& measure,
                                 NumeraireConvention convention = NumeraireConvention::Consistent);

// A with A A^T = corr (pivoted LDLT; accepts singular PSD matrices).
Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr);

}  // namespace sabrlmm
