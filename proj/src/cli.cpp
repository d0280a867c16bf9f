#include "sabrlmm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sabrlmm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::string_view key, int line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ConfigError("invalid number '" + std::string(text) + "' for '" + std::string(key) + "'",
                      line);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(value))
      throw ConfigError("non-finite value for '" + std::string(key) + "'", line);
  return value;
}

std::vector<double> parse_list(std::string_view text, std::string_view key, int line) {
  std::vector<double> out;
  for (std::string_view item : split_list(text)) out.push_back(parse_number<double>(item, key, line));
  return out;
}

bool parse_bool(std::string_view text, std::string_view key, int line) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("expected true or false for '" + std::string(key) + "'", line);
}

[[noreturn]] void bad_choice(std::string_view key, std::string_view value, int line,
                             std::string_view choices) {
  throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) +
                        "' (expected " + std::string(choices) + ")",
                    line);
}

void parse_levels(RunConfig& c, std::string_view text, int line) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    c.level_lo = c.level_hi = parse_number<int>(text, "levels", line);
    return;
  }
  c.level_lo = parse_number<int>(trim(text.substr(0, dots)), "levels", line);
  c.level_hi = parse_number<int>(trim(text.substr(dots + 2)), "levels", line);
}

const std::set<std::string_view> kSections = {"swaption", "market", "model", "numerics", "output"};
const std::set<std::string_view> kRequired = {"swaption", "market", "model", "numerics"};

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Full: return "full";
    case RunMode::Sparse: return "sparse";
    case RunMode::MonteCarlo: return "mc";
    case RunMode::Compare: return "compare";
  }
  return "?";
}

}  // namespace

RunConfig::RunConfig() {
  const MarketCurve ref = reference_curve();
  curve = ref;
  dates = reference_tenor().dates;
  phis = {0.4};
}

TenorStructure RunConfig::tenor() const { return make_tenor(dates); }

SabrLmmParams RunConfig::params() const {
  SabrLmmParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.lambda = lambda;
  p.v0 = v0;
  p.alphas = alphas.empty() ? curve.black_vols : alphas;
  p.phis = phis.size() == 1 ? std::vector<double>(curve.forwards0.size(), phis[0]) : phis;
  return p;
}

Measure RunConfig::pricing_measure() const {
  return measure == Measure::Kind::Terminal ? Measure::terminal() : Measure::forward_at(swaption.a);
}

McConfig RunConfig::mc_config() const {
  McConfig m;
  m.paths = paths;
  m.steps_per_year = steps_per_year;
  m.seed = seed;
  m.scheme = scheme.value_or(beta == 1.0 ? McScheme::LogEuler : McScheme::EulerFullTruncation);
  m.workers = workers;
  m.numeraire = numeraire;
  return m;
}

void set_option(RunConfig& c, std::string_view section, std::string_view key,
                std::string_view value, int line) {
  auto number = [&] { return parse_number<double>(value, key, line); };
  auto integer = [&] { return parse_number<int>(value, key, line); };

  if (section == "swaption") {
    if (key == "a") return void(c.swaption.a = integer());
    if (key == "b") return void(c.swaption.b = integer());
    if (key == "strike") return void(c.swaption.strike = number());
    if (key == "libors") return void(c.swaption.b = c.swaption.a + integer());
  } else if (section == "market") {
    if (key == "dates") return void(c.dates = parse_list(value, key, line));
    if (key == "forwards") return void(c.curve.forwards0 = parse_list(value, key, line));
    if (key == "vols") return void(c.curve.black_vols = parse_list(value, key, line));
  } else if (section == "model") {
    if (key == "beta") return void(c.beta = number());
    if (key == "sigma") return void(c.sigma = number());
    if (key == "phi") return void(c.phis = parse_list(value, key, line));
    if (key == "alphas") return void(c.alphas = parse_list(value, key, line));
    if (key == "lambda") return void(c.lambda = number());
    if (key == "v0") return void(c.v0 = number());
    if (key == "measure") {
      if (value == "forward") return void(c.measure = Measure::Kind::ForwardAt);
      if (value == "terminal") return void(c.measure = Measure::Kind::Terminal);
      bad_choice(key, value, line, "forward or terminal");
    }
    if (key == "numeraire") {
      if (value == "consistent") return void(c.numeraire = NumeraireConvention::Consistent);
      if (value == "expiry") return void(c.numeraire = NumeraireConvention::ExpiryBond);
      bad_choice(key, value, line, "consistent or expiry");
    }
  } else if (section == "numerics") {
    if (key == "mode") {
      if (value == "full") return void(c.mode = RunMode::Full);
      if (value == "sparse") return void(c.mode = RunMode::Sparse);
      if (value == "mc") return void(c.mode = RunMode::MonteCarlo);
      if (value == "compare") return void(c.mode = RunMode::Compare);
      bad_choice(key, value, line, "full, sparse, mc or compare");
    }
    if (key == "theta") return void(c.solver.theta = number());
    if (key == "steps") return void(c.solver.time_steps = integer());
    if (key == "tolerance") return void(c.solver.gs_tolerance = number());
    if (key == "max_sweeps") return void(c.solver.gs_max_iterations = integer());
    if (key == "level" || key == "levels") return parse_levels(c, value, line);
    if (key == "f_max") return void(c.grid.f_max = number());
    if (key == "v_max") return void(c.grid.v_max = number());
    if (key == "max_dimension") return void(c.grid.max_dimension = integer());
    if (key == "paths") return void(c.paths = parse_number<std::int64_t>(value, key, line));
    if (key == "steps_per_year") return void(c.steps_per_year = integer());
    if (key == "seed") return void(c.seed = parse_number<std::uint64_t>(value, key, line));
    if (key == "workers") return void(c.workers = integer());
    if (key == "scheme") {
      if (value == "log-euler") return void(c.scheme = McScheme::LogEuler);
      if (value == "full-truncation") return void(c.scheme = McScheme::EulerFullTruncation);
      bad_choice(key, value, line, "log-euler or full-truncation");
    }
  } else if (section == "output") {
    if (key == "path") return void(c.out_path = std::string(value));
    if (key == "format") {
      if (value == "csv") return void(c.format = ReportFormat::Csv);
      if (value == "json") return void(c.format = ReportFormat::Json);
      bad_choice(key, value, line, "csv or json");
    }
    if (key == "timing") return void(c.timing = parse_bool(value, key, line));
  }
  throw ConfigError("unknown key '" + std::string(key) + "' in [" + std::string(section) + "]",
                    line);
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::string_view section;
  std::set<std::string_view> seen_sections;
  std::set<std::string> seen_keys;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.contains(section))
        throw ConfigError("unknown section [" + std::string(section) + "]", line_no);
      if (!seen_sections.insert(section).second)
        throw ConfigError("duplicate section [" + std::string(section) + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    if (section.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (!seen_keys.insert(std::string(section) + "." + std::string(key)).second)
      throw ConfigError("duplicate key '" + std::string(key) + "'", line_no);
    set_option(c, section, key, value, line_no);
  }
  for (std::string_view s : kRequired)
    if (!seen_sections.contains(s))
      throw ConfigError("missing required section [" + std::string(s) + "]");
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  check(c.beta >= 0.0 && c.beta <= 1.0, "beta outside [0,1]");
  check(c.sigma >= 0.0, "sigma must be non-negative");
  check(c.lambda >= 0.0, "lambda must be non-negative");
  check(c.v0 > 0.0, "v0 must be positive");
  check(!c.curve.forwards0.empty(), "forwards must not be empty");
  check(c.curve.black_vols.size() == c.curve.forwards0.size(),
        "vols must have one entry per forward");
  check(c.dates.size() == c.curve.forwards0.size() + 1, "dates must have one entry more than forwards");
  check(c.phis.size() == 1 || c.phis.size() == c.curve.forwards0.size(),
        "phi must be a single value or one per forward");
  check(c.alphas.empty() || c.alphas.size() == c.curve.forwards0.size(),
        "alphas must have one entry per forward");
  check(c.level_lo >= 0 && c.level_lo <= c.level_hi, "levels must be a nonempty range LO..HI with LO >= 0");
  check(c.level_hi <= 24, "levels above 24 are not supported");
  check(c.paths >= 1, "paths must be at least 1");
  check(c.steps_per_year >= 1, "steps_per_year must be at least 1");
  check(c.workers >= 1, "workers must be at least 1");
  check(c.grid.f_max > 0.0 && c.grid.v_max > 0.0, "f_max and v_max must be positive");

  TenorStructure tenor;
  try {
    tenor = c.tenor();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("dates: ") + e.what());
  }
  auto wrap = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
  };
  wrap("swaption", [&] { validate(c.swaption, tenor); });
  wrap("market", [&] { validate(c.curve, tenor); });
  wrap("model", [&] { validate(c.params(), tenor); });
  wrap("numerics", [&] { validate(c.solver); });
  check(!(c.measure == Measure::Kind::Terminal && c.swaption.b != int(tenor.periods())),
        "measure: terminal measure requires b = N");
  if (c.mode == RunMode::Full) {
    const int d = c.swaption.forward_count() + 1;
    check(d <= c.grid.max_dimension, "max_dimension: full grid dimension " + std::to_string(d) +
                                         " exceeds the configured maximum " +
                                         std::to_string(c.grid.max_dimension));
  }
  if (c.mode == RunMode::Sparse || c.mode == RunMode::Compare)
    check(c.level_lo >= c.swaption.forward_count(),
          "levels: sparse level must be at least d - 1 = " + std::to_string(c.swaption.forward_count()));
  if (c.mode == RunMode::MonteCarlo || c.mode == RunMode::Compare)
    check(!(c.mc_config().scheme == McScheme::LogEuler && c.beta != 1.0),
          "scheme: log-euler requires beta = 1");
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream s;
  s << std::hexfloat;
  auto list = [&](const std::vector<double>& v) {
    for (double x : v) s << x << ',';
    s << ';';
  };
  s << mode_name(c.mode) << ';' << c.swaption.a << ';' << c.swaption.b << ';' << c.swaption.strike << ';';
  list(c.dates);
  list(c.curve.forwards0);
  list(c.curve.black_vols);
  s << c.beta << ';' << c.sigma << ';';
  list(c.phis);
  list(c.alphas);
  s << c.lambda << ';' << c.v0 << ';' << int(c.measure) << ';' << int(c.numeraire) << ';'
    << c.solver.theta << ';' << c.solver.time_steps << ';' << c.solver.gs_tolerance << ';'
    << c.solver.gs_max_iterations << ';' << c.grid.f_max << ';' << c.grid.v_max << ';'
    << c.grid.max_dimension << ';' << c.level_lo << ';' << c.level_hi << ';' << c.paths << ';'
    << c.steps_per_year << ';' << c.seed << ';' << int(c.mc_config().scheme);

  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return hex64(h);
}

std::optional<double> exact_price_bp(const RunConfig& c) {
  if (c.sigma != 0.0 || c.beta != 1.0 || c.swaption.forward_count() != 1) return std::nullopt;
  if (c.measure == Measure::Kind::ForwardAt && c.numeraire != NumeraireConvention::Consistent)
    return std::nullopt;
  const TenorStructure tenor = c.tenor();
  const SabrLmmParams p = c.params();
  const int a = c.swaption.a;
  const double vol = p.alpha(a) * c.v0 * std::sqrt(tenor.date(a) - tenor.date(0));
  const double discount = bond_price(std::span<const double>(c.curve.forwards0), 0, a + 1, tenor);
  return to_basis_points(discount * tenor.accrual(a) *
                         black_price(c.swaption.strike, c.curve.forwards0[std::size_t(a)], vol));
}

Report run(const RunConfig& c) {
  validate(c);
  Report r;
  r.config = c;
  r.hash = config_hash(c);
  r.exact_bp = exact_price_bp(c);

  const TenorStructure tenor = c.tenor();
  const SabrLmmParams params = c.params();
  const Measure measure = c.pricing_measure();
  PricingOptions options = c.grid;
  options.numeraire = c.numeraire;

  auto error = [&](double v) -> std::optional<double> {
    if (!r.exact_bp) return std::nullopt;
    return std::abs(v - *r.exact_bp);
  };

  if (c.mode == RunMode::Full) {
    for (int n = c.level_lo; n <= c.level_hi; ++n) {
      const FullGridResult g =
          price_full_grid(n, c.swaption, tenor, c.curve, params, measure, c.solver, options);
      r.rows.push_back({n, g.price_bp, error(g.price_bp), g.seconds, g.grid_points});
    }
  }
  if (c.mode == RunMode::Sparse || c.mode == RunMode::Compare) {
    for (int n = c.level_lo; n <= c.level_hi; ++n) {
      const SparseResult s = price_sparse(n, c.swaption, tenor, c.curve, params, measure, c.solver,
                                          c.workers, options);
      r.rows.push_back({n, s.price_bp, error(s.price_bp), s.seconds, s.sparse_points});
    }
  }
  if (c.mode == RunMode::MonteCarlo || c.mode == RunMode::Compare)
    r.mc = estimate_price(c.swaption, tenor, c.curve, params, measure, c.mc_config());
  if (c.mode == RunMode::Compare && r.mc->has_interval()) {
    const double finest = r.rows.back().solution_bp;
    r.inside_ci = finest >= r.mc->ci_low_bp && finest <= r.mc->ci_high_bp;
  }
  return r;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const Report& r) {
  if (!r.rows.empty()) {
    out << "level,solution_bp,error_bp,time_s,grid_points,config_hash\n";
    for (const ReportRow& row : r.rows) {
      out << row.level << ',' << fixed(row.solution_bp, 9) << ','
          << (row.error_bp ? fixed(*row.error_bp, 9) : "") << ','
          << (r.config.timing ? fixed(row.time_s, 3) : "") << ',' << row.grid_points << ','
          << r.hash << '\n';
    }
  }
  if (r.mc) {
    if (!r.rows.empty()) out << '\n';
    const McResult& m = *r.mc;
    const bool ci = m.has_interval();
    out << "paths,mean_bp,half_width_bp,ci_low_bp,ci_high_bp,time_s,"
        << (r.inside_ci ? "inside_ci," : "") << "config_hash\n";
    out << m.paths << ',' << fixed(m.mean_bp, 9) << ',' << (ci ? fixed(m.half_width_bp, 9) : "NA")
        << ',' << (ci ? fixed(m.ci_low_bp, 9) : "NA") << ',' << (ci ? fixed(m.ci_high_bp, 9) : "NA")
        << ',' << (r.config.timing ? fixed(m.seconds, 3) : "") << ','
        << (r.inside_ci ? (*r.inside_ci ? "true," : "false,") : "") << r.hash << '\n';
  }
}

void write_json(std::ostream& out, const Report& r) {
  using nlohmann::json;
  json doc;
  doc["config_hash"] = r.hash;
  doc["mode"] = mode_name(r.config.mode);
  doc["exact_bp"] = r.exact_bp ? json(*r.exact_bp) : json(nullptr);
  json rows = json::array();
  for (const ReportRow& row : r.rows) {
    rows.push_back({{"level", row.level},
                    {"solution_bp", row.solution_bp},
                    {"error_bp", row.error_bp ? json(*row.error_bp) : json(nullptr)},
                    {"time_s", r.config.timing ? json(row.time_s) : json(nullptr)},
                    {"grid_points", row.grid_points}});
  }
  doc["rows"] = rows;
  if (r.mc) {
    const McResult& m = *r.mc;
    const bool ci = m.has_interval();
    doc["monte_carlo"] = {{"paths", m.paths},
                          {"mean_bp", m.mean_bp},
                          {"half_width_bp", ci ? json(m.half_width_bp) : json(nullptr)},
                          {"ci_low_bp", ci ? json(m.ci_low_bp) : json(nullptr)},
                          {"ci_high_bp", ci ? json(m.ci_high_bp) : json(nullptr)},
                          {"time_s", r.config.timing ? json(m.seconds) : json(nullptr)}};
  }
  if (r.inside_ci) doc["inside_ci"] = *r.inside_ci;
  out << doc.dump(2) << '\n';
}

}  // namespace sabrlmm
