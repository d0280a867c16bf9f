#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sabrlmm/montecarlo.hpp"
#include "sabrlmm/pde.hpp"
#include "sabrlmm/sparse.hpp"

namespace sabrlmm {

enum class RunMode { Full, Sparse, MonteCarlo, Compare };
enum class ReportFormat { Csv, Json };

// Everything one batch run needs. Defaults are the reference setup: 1x1 swaption on the
// EURIBOR curve of 27 July 2004, K = 5.5%, beta = 1, sigma = 0, phi = 0.4, lambda = 0.1, theta = 0.5, M = 256.
struct RunConfig {
  RunMode mode = RunMode::Full;

  SwaptionSpec swaption;
  std::vector<double> dates;  // T_0..T_N
  MarketCurve curve;

  double beta = 1.0;
  double sigma = 0.0;
  std::vector<double> phis;    // one entry broadcasts to every forward
  std::vector<double> alphas;  // empty: the curve's Black vols
  double lambda = 0.1;
  double v0 = 1.0;
  Measure::Kind measure = Measure::Kind::ForwardAt;
  NumeraireConvention numeraire = NumeraireConvention::Consistent;

  SolverConfig solver;
  PricingOptions grid;
  int level_lo = 3;
  int level_hi = 6;

  std::int64_t paths = 1'000'000;
  int steps_per_year = 256;
  std::uint64_t seed = 20240101;
  std::optional<McScheme> scheme;  // unset: log-Euler for beta = 1, full truncation otherwise

  int workers = 1;
  std::string out_path;  // empty: stdout
  ReportFormat format = ReportFormat::Csv;
  bool timing = true;

  RunConfig();

  TenorStructure tenor() const;
  SabrLmmParams params() const;
  Measure pricing_measure() const;
  McConfig mc_config() const;
};

// Parse or validation failure. line() is 0 for errors not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Line-oriented `key = value` document with [swaption], [market], [model], [numerics] and
// optional [output] sections. Lists are comma separated; '#' starts a comment.
RunConfig parse_config(std::string_view text);

// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);

// Applies `key = value` as if it appeared in `section`; used by flag overrides too.
void set_option(RunConfig& config, std::string_view section, std::string_view key,
                std::string_view value, int line = 0);

// FNV-1a over the canonical form of every result-affecting field (not workers or output).
std::string config_hash(const RunConfig& config);

struct ReportRow {
  int level = 0;
  double solution_bp = 0.0;
  std::optional<double> error_bp;
  double time_s = 0.0;
  std::uint64_t grid_points = 0;
};

struct Report {
  RunConfig config;
  std::string hash;
  std::optional<double> exact_bp;
  std::vector<ReportRow> rows;
  std::optional<McResult> mc;
  std::optional<bool> inside_ci;  // compare mode: finest sparse level inside the MC interval
};

// Exact reference when one exists: the Black caplet value for a 1x1 swaption with
// sigma = 0, beta = 1 under the consistent numeraire.
std::optional<double> exact_price_bp(const RunConfig& config);

Report run(const RunConfig& config);

void write_csv(std::ostream& out, const Report& report);
void write_json(std::ostream& out, const Report& report);

}  // namespace sabrlmm
