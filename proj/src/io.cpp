#include "sparse_unif/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sparse_unif/error.hpp"

namespace sparse_unif {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// NaN and infinities have no JSON literal; they are written as null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_from(const Json& j, double if_null = kNaN) {
  if (j.is_null()) return if_null;
  return j.get<double>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string density_name(Density d) { return d == Density::Dense ? "dense" : "sparse"; }

Density parse_density(const std::string& s) {
  if (s == "dense") return Density::Dense;
  if (s == "sparse") return Density::Sparse;
  throw ConfigError("regime must be dense or sparse, got '" + s + "'");
}

Json range_json(const AxisRange& r) { return {{"lo", r.lo}, {"hi", r.hi}, {"steps", r.steps}, {"open", r.open}}; }

AxisRange range_from(const Json& j, const AxisRange& fallback) {
  AxisRange r = fallback;
  if (j.is_array()) {
    if (j.size() != 2) throw ConfigError("range array must be [lo, hi]");
    r.lo = j[0].get<double>();
    r.hi = j[1].get<double>();
    return r;
  }
  r.lo = j.value("lo", r.lo);
  r.hi = j.value("hi", r.hi);
  r.steps = j.value("steps", r.steps);
  r.open = j.value("open", r.open);
  return r;
}

Json n_rule_json(const NRule& rule) {
  switch (rule.kind) {
    case NRule::Kind::EqualsD: return {{"kind", "equals_d"}};
    case NRule::Kind::PowerOfD: return {{"kind", "power_of_d"}, {"exponent", rule.exponent}};
    case NRule::Kind::Fixed: return {{"kind", "fixed"}, {"n", rule.n}};
  }
  return {};
}

NRule n_rule_from(const Json& j) {
  NRule rule;
  const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "equals_d") {
    rule.kind = NRule::Kind::EqualsD;
  } else if (kind == "power_of_d") {
    rule.kind = NRule::Kind::PowerOfD;
    rule.exponent = j.at("exponent").get<double>();
  } else if (kind == "fixed") {
    rule.kind = NRule::Kind::Fixed;
    rule.n = j.at("n").get<std::uint64_t>();
  } else {
    throw ConfigError("n_rule kind must be equals_d, power_of_d or fixed, got '" + kind + "'");
  }
  return rule;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Json to_json(const TestReport& report) {
  Json cal = {{"kind", report.calibration.kind == Calibration::Kind::Analytic ? "analytic" : "monte_carlo"}};
  if (report.calibration.kind == Calibration::Kind::MonteCarlo) {
    cal["replications"] = report.calibration.replications;
    cal["level"] = report.calibration.level;
  }
  Json j = {{"name", to_string(report.statistic)},
            {"value", number_or_null(report.value)},
            {"cutoff", number_or_null(report.cutoff)},
            {"reject", report.reject},
            {"calibration", cal}};
  if (report.per_t) {
    Json pts = Json::array();
    for (const auto& p : *report.per_t) pts.push_back({{"t", p.t}, {"value", number_or_null(p.value)}});
    j["per_t"] = pts;
  }
  return j;
}

Json to_json(const SecondMomentReport& report) {
  Json j = {{"value", number_or_null(report.value)},
            {"exact", report.is_exact},
            {"risk_lower_bound", report.risk_lower_bound}};
  if (report.se) j["se"] = *report.se;
  if (report.binomial_bound) j["binomial_bound"] = number_or_null(*report.binomial_bound);
  return j;
}

Json to_json(const PhaseGridSpec& spec) {
  return {{"regime", density_name(spec.regime)},
          {"alpha_range", range_json(spec.alpha_range)},
          {"beta_range", range_json(spec.beta_range)},
          {"d", spec.d},
          {"n_rule", n_rule_json(spec.n_rule)},
          {"reps", spec.reps},
          {"level", spec.level},
          {"calibration_B", spec.calibration_B},
          {"scheme", to_string(spec.scheme)},
          {"seed", {{"root_seed", spec.seed.root_seed}, {"stream_id", spec.seed.stream_id}}},
          {"test", to_string(spec.test)},
          {"calibration", spec.calibration == Calibration::Kind::Analytic ? "analytic" : "monte_carlo"},
          {"max_c", spec.options.max.c},
          {"one_sided", spec.options.ghc.one_sided},
          {"normal_approximation", spec.options.ghc.normal_approximation}};
}

PhaseGridSpec phase_grid_spec_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigError("phase grid config must be an object");
    static const std::vector<std::string> known = {
        "regime", "alpha_range", "beta_range", "d", "n_rule", "reps", "level", "calibration_B",
        "scheme", "seed", "test",  "calibration", "max_c", "one_sided", "normal_approximation"};
    for (const auto& [key, _] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
    PhaseGridSpec spec;
    if (j.contains("regime")) spec.regime = parse_density(j["regime"].get<std::string>());
    if (spec.regime == Density::Sparse) {
      spec.alpha_range = {0.5, 1.0, 20, true};
      spec.beta_range = {0.0, 1.0, 20, true};
      spec.n_rule = {NRule::Kind::PowerOfD, 1.4, 0};
      spec.test = StatisticKind::GHC;
    }
    if (j.contains("alpha_range")) spec.alpha_range = range_from(j["alpha_range"], spec.alpha_range);
    if (j.contains("beta_range")) spec.beta_range = range_from(j["beta_range"], spec.beta_range);
    spec.d = j.value("d", spec.d);
    if (j.contains("n_rule")) spec.n_rule = n_rule_from(j["n_rule"]);
    spec.reps = j.value("reps", spec.reps);
    spec.level = j.value("level", spec.level);
    spec.calibration_B = j.value("calibration_B", spec.calibration_B);
    if (j.contains("scheme")) spec.scheme = parse_scheme(j["scheme"].get<std::string>());
    if (j.contains("seed")) {
      const Json& s = j["seed"];
      if (s.is_number_unsigned() || s.is_number_integer()) {
        spec.seed = {s.get<std::uint64_t>(), 0};
      } else {
        spec.seed = {s.value("root_seed", std::uint64_t{0}), s.value("stream_id", std::uint64_t{0})};
      }
    }
    if (j.contains("test")) spec.test = parse_statistic(j["test"].get<std::string>());
    if (j.contains("calibration")) {
      const auto c = j["calibration"].get<std::string>();
      if (c == "analytic") {
        spec.calibration = Calibration::Kind::Analytic;
      } else if (c == "monte_carlo") {
        spec.calibration = Calibration::Kind::MonteCarlo;
      } else {
        throw ConfigError("calibration must be analytic or monte_carlo, got '" + c + "'");
      }
    }
    spec.options.max.c = j.value("max_c", spec.options.max.c);
    spec.options.ghc.one_sided = j.value("one_sided", spec.options.ghc.one_sided);
    spec.options.ghc.normal_approximation = j.value("normal_approximation", spec.options.ghc.normal_approximation);
    spec.validate();
    return spec;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed phase grid config: ") + e.what());
  }
}

Json to_json(const PowerGrid& grid) {
  Json cells = Json::array();
  for (const auto& c : grid.cells) {
    cells.push_back({{"alpha", c.alpha},
                     {"beta", c.beta},
                     {"power", number_or_null(c.power)},
                     {"se", number_or_null(c.se)},
                     {"reps", c.reps},
                     {"feasible", c.feasible}});
  }
  Json curve = Json::array();
  for (const auto& [a, b] : grid.boundary_curve) curve.push_back({{"alpha", a}, {"beta", b}});
  return {{"alpha_steps", grid.alpha_steps}, {"beta_steps", grid.beta_steps}, {"cells", cells},
          {"boundary_curve", curve}};
}

PowerGrid power_grid_from_json(const Json& j) {
  try {
    PowerGrid grid;
    grid.alpha_steps = j.at("alpha_steps").get<std::uint64_t>();
    grid.beta_steps = j.at("beta_steps").get<std::uint64_t>();
    for (const auto& c : j.at("cells")) {
      grid.cells.push_back({c.at("alpha").get<double>(), c.at("beta").get<double>(), number_from(c.at("power")),
                            number_from(c.at("se")), c.at("reps").get<std::uint64_t>(),
                            c.at("feasible").get<bool>()});
    }
    for (const auto& p : j.at("boundary_curve")) {
      grid.boundary_curve.emplace_back(p.at("alpha").get<double>(), p.at("beta").get<double>());
    }
    if (grid.cells.size() != grid.alpha_steps * grid.beta_steps) throw ConfigError("cell count mismatch");
    return grid;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed power grid: ") + e.what());
  }
}

PhaseGridSpec load_phase_grid_spec(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return phase_grid_spec_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Histogram parse_histogram(const std::string& text, SamplingScheme default_scheme) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ConfigError("histogram input is empty");
  if (text[first] == '{') {
    try {
      const Json j = Json::parse(text);
      auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
      std::uint64_t total = 0;
      for (auto c : counts) total += c;
      const std::uint64_t n = j.value("n", total);
      const SamplingScheme scheme =
          j.contains("scheme") ? parse_scheme(j["scheme"].get<std::string>()) : default_scheme;
      return Histogram(std::move(counts), n, scheme);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("malformed histogram JSON: ") + e.what());
    }
  }
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::size_t pos = first;
  const std::size_t end = text.find_last_not_of(" \t\r\n") + 1;
  if (text.find('\n', first) < end) throw ConfigError("histogram CSV must be a single row");
  while (pos <= end) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos || comma > end) comma = end;
    std::size_t a = text.find_first_not_of(" \t", pos);
    std::size_t b = comma;
    while (b > a && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + a, text.data() + b, v);
    if (a >= b || ec != std::errc() || ptr != text.data() + b) {
      throw ConfigError("histogram CSV field '" + text.substr(pos, comma - pos) + "' is not a count");
    }
    counts.push_back(v);
    total += v;
    pos = comma + 1;
  }
  return Histogram(std::move(counts), total, default_scheme);
}

Histogram load_histogram(const std::filesystem::path& path, SamplingScheme default_scheme) {
  const std::string text = read_file(path);
  try {
    return parse_histogram(text, default_scheme);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

GridFormat parse_grid_format(const std::string& name) {
  if (name == "csv") return GridFormat::CSV;
  if (name == "json") return GridFormat::JSON;
  throw ConfigError("grid format must be csv or json, got '" + name + "'");
}

std::string grid_to_csv(const PowerGrid& grid) {
  std::string out = "alpha,beta,power,se,reps,feasible\n";
  for (const auto& c : grid.cells) {
    out += format_double(c.alpha) + ',' + format_double(c.beta) + ',' + format_double(c.power) + ',' +
           format_double(c.se) + ',' + std::to_string(c.reps) + ',' + (c.feasible ? "true" : "false") + '\n';
  }
  return out;
}

std::string boundary_to_csv(const PowerGrid& grid) {
  std::string out = "alpha,beta\n";
  for (const auto& [a, b] : grid.boundary_curve) out += format_double(a) + ',' + format_double(b) + '\n';
  return out;
}

std::filesystem::path boundary_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p.replace_extension(".boundary.csv");
  return p;
}

void emit_grid(const PowerGrid& grid, const std::filesystem::path& path, GridFormat format) {
  write_file(path, format == GridFormat::CSV ? grid_to_csv(grid) : to_json(grid).dump(2) + "\n");
  write_file(boundary_path(path), boundary_to_csv(grid));
}

}  // namespace sparse_unif
