#include "sabrlmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sabrlmm {

void validate(const SabrLmmParams& params, const TenorStructure& tenor) {
  if (!(params.beta >= 0.0 && params.beta <= 1.0))
    throw std::invalid_argument("beta outside [0,1]");
  if (!(params.sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  if (!(params.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(params.v0 >= 0.0)) throw std::invalid_argument("v0 must be non-negative");
  if (params.alphas.size() != tenor.periods() || params.phis.size() != tenor.periods())
    throw std::invalid_argument("alphas and phis need one entry per tenor period");
  for (double a : params.alphas)
    if (!(a >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  for (double p : params.phis)
    if (!(std::abs(p) <= 1.0)) throw std::invalid_argument("phi outside [-1,1]");
}

SabrLmmParams params_from_curve(const MarketCurve& curve, double beta, double sigma, double phi,
                                double lambda) {
  SabrLmmParams p;
  p.beta = beta;
  p.alphas = curve.black_vols;
  p.sigma = sigma;
  p.phis.assign(curve.black_vols.size(), phi);
  p.lambda = lambda;
  p.v0 = 1.0;
  return p;
}

int numeraire_index(const Measure& measure, const TenorStructure& tenor,
                    NumeraireConvention convention) {
  const int n = static_cast<int>(tenor.periods());
  if (measure.kind == Measure::Kind::Terminal) return n;
  if (measure.index < 0 || measure.index >= n)
    throw std::out_of_range("forward measure index outside tenor");
  return convention == NumeraireConvention::ExpiryBond ? measure.index : measure.index + 1;
}

namespace {

double drift_term(int i, int j, std::span<const double> forwards, const SabrLmmParams& params,
                  const TenorStructure& tenor) {
  const double tau = tenor.accrual(j);
  const double growth = 1.0 + tau * forwards[j];
  if (!(growth > 0.0))
    throw std::domain_error("drift: 1 + tau_j F_j <= 0 for j = " + std::to_string(j));
  const double fj = std::max(forwards[j], 0.0);
  const double rho = correlation(params.lambda, tenor.date(i), tenor.date(j));
  return tau * std::pow(fj, params.beta) / growth * rho * params.alpha(j);
}

}  // namespace

double drift(int i, std::span<const double> forwards, double vol, const Measure& measure,
             const SabrLmmParams& params, const TenorStructure& tenor) {
  const int n = static_cast<int>(tenor.periods());
  const double scale = params.alpha(i) * vol * vol;
  double sum = 0.0;
  if (measure.kind == Measure::Kind::Terminal) {
    if (i >= n - 1) return 0.0;
    for (int j = i + 1; j <= n - 1; ++j) sum += drift_term(i, j, forwards, params, tenor);
    return -scale * sum;
  }
  const int a = measure.index;
  if (i < a) throw std::out_of_range("drift: forward already fixed under this measure");
  if (i == a) return 0.0;
  for (int j = a + 1; j <= i; ++j) sum += drift_term(i, j, forwards, params, tenor);
  return scale * sum;
}

Eigen::MatrixXd joint_correlation(const SabrLmmParams& params, const TenorStructure& tenor,
                                  int first, int count) {
  if (count < 1) throw std::invalid_argument("joint_correlation: need at least one forward");
  const Eigen::Index k = count;
  Eigen::MatrixXd c(k + 1, k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index s = 0; s < k; ++s)
      c(r, s) = r == s ? 1.0
                       : correlation(params.lambda, tenor.date(first + int(r)),
                                     tenor.date(first + int(s)));
    c(r, k) = c(k, r) = params.phi(first + int(r));
  }
  c(k, k) = 1.0;
  // LDLT rather than LLT so that |phi| = 1 (singular but admissible) passes.
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-12).any())
    throw std::domain_error("joint correlation matrix is not positive semidefinite");
  return c;
}

double numeraire_relative_payoff(std::span<const double> forwards, const SwaptionSpec& spec,
                                 const TenorStructure& tenor, const Measure& measure,
                                 NumeraireConvention convention) {
  const int num = numeraire_index(measure, tenor, convention);
  if (num < spec.a) throw std::invalid_argument("numeraire bond matures before the swaption expiry");
  return swaption_payoff(forwards, spec, tenor) / bond_price(forwards, spec.a, num, tenor);
}

Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(corr);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-12).any())
    throw std::domain_error("correlation matrix is not positive semidefinite");
  const Eigen::VectorXd root = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd lower = ldlt.matrixL();
  const Eigen::MatrixXd factor = lower * root.asDiagonal();
  return ldlt.transpositionsP().transpose() * factor;
}

}  // namespace sabrlmm
