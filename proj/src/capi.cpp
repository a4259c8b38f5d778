#include "sparse_unif/sparse_unif.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <optional>
#include <random>
#include <string>

#include "sparse_unif/error.hpp"
#include "sparse_unif/harness.hpp"
#include "sparse_unif/io.hpp"
#include "sparse_unif/lowerbound.hpp"
#include "sparse_unif/parallel.hpp"
#include "sparse_unif/statistics.hpp"

struct su_histogram {
  sparse_unif::Histogram value;
};

struct su_test {
  sparse_unif::CalibratedTest value;
};

namespace {

using namespace sparse_unif;

thread_local std::string g_last_error;

su_status fail(su_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Maps the library's exception hierarchy onto status codes.
template <typename F>
su_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SU_OK;
  } catch (const InfeasibleError& e) {
    return fail(SU_ERR_INFEASIBLE, e.what());
  } catch (const DomainError& e) {
    return fail(SU_ERR_DOMAIN, e.what());
  } catch (const ConfigError& e) {
    return fail(SU_ERR_CONFIG, e.what());
  } catch (const IoError& e) {
    return fail(SU_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SU_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SU_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SU_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const Json& j, char** out) { *out = dup_string(j.dump(2)); }

ProblemParams to_params(const su_params& p) {
  ProblemParams out{p.n, p.d, p.s, p.alpha, p.epsilon};
  out.validate();
  return out;
}

su_params from_params(const ProblemParams& p) { return {p.n, p.d, p.s, p.alpha, p.epsilon}; }

SeedSpec to_seed(su_seed s) { return {s.root_seed, s.stream_id}; }

SamplingScheme scheme_or(const char* name, SamplingScheme fallback) {
  return name ? parse_scheme(name) : fallback;
}

}  // namespace

extern "C" {

const char* su_version(void) { return "1.0.0"; }

const char* su_last_error(void) { return g_last_error.c_str(); }

void su_string_free(char* s) { std::free(s); }

su_status su_params_from_alpha(uint64_t n, uint64_t d, double alpha, double epsilon, su_params* out) {
  if (!out) return fail(SU_ERR_NULL_ARGUMENT, "out is NULL");
  return guarded([&] {
    const ProblemParams p = ProblemParams::from_alpha(n, d, alpha, epsilon);
    p.validate();
    *out = from_params(p);
  });
}

su_status su_params_from_sparsity(uint64_t n, uint64_t d, uint64_t s, double epsilon, su_params* out) {
  if (!out) return fail(SU_ERR_NULL_ARGUMENT, "out is NULL");
  return guarded([&] {
    ProblemParams p{n, d, s, 0.0, epsilon};
    if (d < 2) throw DomainError("d must be at least 2 to infer alpha from s");
    if (s == 0 || s > d) throw DomainError("s must lie in [1, d]");
    p.alpha = 1.0 - std::log(static_cast<double>(s)) / std::log(static_cast<double>(d));
    p.alpha = std::clamp(p.alpha, 0.0, 1.0);
    p.validate();
    *out = from_params(p);
  });
}

su_status su_histogram_create(const uint64_t* counts, size_t d, uint64_t n, const char* scheme, su_histogram** out) {
  if (!out || (!counts && d > 0)) return fail(SU_ERR_NULL_ARGUMENT, "counts or out is NULL");
  return guarded([&] {
    std::vector<std::uint64_t> v(counts, counts + d);
    *out = new su_histogram{Histogram(std::move(v), n, scheme_or(scheme, SamplingScheme::Multinomial))};
  });
}

su_status su_histogram_load(const char* path, const char* default_scheme, su_histogram** out) {
  if (!path || !out) return fail(SU_ERR_NULL_ARGUMENT, "path or out is NULL");
  return guarded([&] {
    *out = new su_histogram{load_histogram(path, scheme_or(default_scheme, SamplingScheme::Multinomial))};
  });
}

su_status su_histogram_sample_null(uint64_t d, uint64_t n, const char* scheme, su_seed seed, su_histogram** out) {
  if (!out) return fail(SU_ERR_NULL_ARGUMENT, "out is NULL");
  return guarded([&] {
    *out = new su_histogram{sample_null(d, n, scheme_or(scheme, SamplingScheme::Multinomial), to_seed(seed))};
  });
}

size_t su_histogram_size(const su_histogram* h) { return h ? h->value.size() : 0; }

uint64_t su_histogram_n(const su_histogram* h) { return h ? h->value.n() : 0; }

su_status su_histogram_counts(const su_histogram* h, uint64_t* out, size_t capacity) {
  if (!h || !out) return fail(SU_ERR_NULL_ARGUMENT, "histogram or out is NULL");
  if (capacity < h->value.size()) return fail(SU_ERR_DOMAIN, "output buffer smaller than d");
  std::memcpy(out, h->value.counts().data(), h->value.size() * sizeof(uint64_t));
  return SU_OK;
}

void su_histogram_free(su_histogram* h) { delete h; }

void su_test_options_default(su_test_options* out) {
  if (!out) return;
  out->statistic = "chisq";
  out->calibration = "monte_carlo";
  out->level = 0.05;
  out->replications = 999;
  out->seed = {0, 0};
  out->scheme = "multinomial";
  out->max_c = MaxTestOptions{}.c;
  out->one_sided = 0;
  out->normal_approximation = 0;
  out->threads = 0;
}

su_status su_test_create(const su_params* params, const su_test_options* options, su_test** out) {
  if (!params || !options || !out) return fail(SU_ERR_NULL_ARGUMENT, "params, options or out is NULL");
  return guarded([&] {
    const ProblemParams p = to_params(*params);
    const StatisticKind kind = parse_statistic(options->statistic ? options->statistic : "chisq");
    TestOptions opts;
    opts.max.c = options->max_c;
    opts.ghc.one_sided = options->one_sided != 0;
    opts.ghc.normal_approximation = options->normal_approximation != 0;
    const std::string cal = options->calibration ? options->calibration : "monte_carlo";
    if (cal == "analytic") {
      *out = new su_test{CalibratedTest::analytic(kind, p, opts)};
    } else if (cal == "monte_carlo") {
      *out = new su_test{CalibratedTest::monte_carlo(kind, p, options->level, options->replications,
                                                     to_seed(options->seed),
                                                     scheme_or(options->scheme, SamplingScheme::Multinomial), opts,
                                                     resolve_threads(options->threads))};
    } else {
      throw ConfigError("calibration must be analytic or monte_carlo, got '" + cal + "'");
    }
  });
}

su_status su_test_evaluate(const su_test* test, const su_histogram* h, char** report_json) {
  if (!test || !h || !report_json) return fail(SU_ERR_NULL_ARGUMENT, "test, histogram or out is NULL");
  return guarded([&] { emit(to_json(test->value.evaluate(h->value)), report_json); });
}

su_status su_test_reject(const su_test* test, const su_histogram* h, int* reject) {
  if (!test || !h || !reject) return fail(SU_ERR_NULL_ARGUMENT, "test, histogram or out is NULL");
  return guarded([&] { *reject = test->value.evaluate(h->value).reject ? 1 : 0; });
}

su_status su_test_cutoffs(const su_test* test, char** json) {
  if (!test || !json) return fail(SU_ERR_NULL_ARGUMENT, "test or out is NULL");
  return guarded([&] {
    const auto& cal = test->value.calibration();
    Json rows = Json::array();
    const double level = cal.kind == Calibration::Kind::MonteCarlo
                             ? cal.level / static_cast<double>(test->value.cutoffs().size())
                             : 0.0;
    const auto& ties = test->value.tie_rejection();
    for (std::size_t i = 0; i < test->value.cutoffs().size(); ++i) {
      const auto& [kind, cutoff] = test->value.cutoffs()[i];
      Json row = {{"component", to_string(kind)}, {"cutoff", std::isfinite(cutoff) ? Json(cutoff) : Json(nullptr)}};
      if (cal.kind == Calibration::Kind::MonteCarlo) {
        row["level"] = level;
        row["tie_reject_probability"] = ties[i];
      }
      rows.push_back(row);
    }
    Json j = {{"statistic", to_string(test->value.kind())},
              {"calibration", cal.kind == Calibration::Kind::Analytic ? "analytic" : "monte_carlo"},
              {"cutoffs", rows}};
    if (cal.kind == Calibration::Kind::MonteCarlo) {
      j["replications"] = cal.replications;
      j["level"] = cal.level;
    }
    emit(j, json);
  });
}

void su_test_free(su_test* test) { delete test; }

su_status su_thresholds(const su_params* params, char** json) {
  if (!params || !json) return fail(SU_ERR_NULL_ARGUMENT, "params or out is NULL");
  return guarded([&] {
    const ProblemParams p = to_params(*params);
    const Regime regime = classify_regime(p);
    emit({{"n", p.n},
          {"d", p.d},
          {"s", p.s},
          {"alpha", p.alpha},
          {"eps1", threshold_eps1(p)},
          {"eps2", threshold_eps2(p)},
          {"c_alpha", p.alpha > 0.5 && p.alpha < 1.0 ? Json(c_alpha(p.alpha)) : Json(nullptr)},
          {"eps_max", p.s >= 2 ? Json(epsilon_max(p.d, p.s)) : Json(nullptr)},
          {"density", to_string(regime.density)},
          {"sample_size_regime", to_string(regime.sample_size)}},
         json);
  });
}

su_status su_lower_bound(const su_params* params, const char* prior, double delta, uint64_t mc_replications,
                         su_seed seed, unsigned threads, char** json) {
  if (!params || !prior || !json) return fail(SU_ERR_NULL_ARGUMENT, "params, prior or out is NULL");
  return guarded([&] {
    const ProblemParams p = to_params(*params);
    const std::string kind = prior;
    Json j = {{"prior", kind}, {"n", p.n}, {"d", p.d}, {"s", p.s}, {"epsilon", p.epsilon}};
    if (kind == "paired") {
      j["second_moment"] = to_json(paired_second_moment_exact(p));
      j["feasible"] = block_alternative_feasible(p);
      if (mc_replications > 0) {
        PairedMcOptions opts;
        opts.threads = resolve_threads(threads);
        opts.inner_samples = 256;
        j["monte_carlo"] = to_json(paired_second_moment_mc(p, mc_replications, to_seed(seed), opts));
      }
    } else if (kind == "sparse_twosided") {
      const double eta = sparse_twosided_eta(p, delta);
      j["delta"] = delta;
      j["eta"] = eta;
      j["feasible"] = eta <= 1.0 / static_cast<double>(p.d);
      j["l1"] = eta * static_cast<double>(p.s);
      j["fr_threshold"] = [&] {
        const FrThreshold fr = f_r_threshold(p);
        return Json{{"r", fr.r}, {"t_r", fr.t_r}, {"c_star", fr.c_star}};
      }();
    } else if (kind == "impossibility") {
      const PriorSpec spec = PriorSpec{PriorKind::Impossibility, p, delta, 0.0, 0.0}.resolved();
      j["delta"] = delta;
      j["gamma_d"] = spec.gamma_d;
      j["r_n"] = spec.r_n;
      j["expected_l1"] = expected_l1_of_impossibility_prior(p, delta);
      j["l1_lower_bound"] = 2.0 * std::pow(1.0 - delta, 3) * static_cast<double>(p.s) / static_cast<double>(p.d);
      if (mc_replications > 0) {
        double good = 0.0;
        double l1 = 0.0;
        for (std::uint64_t b = 0; b < mc_replications; ++b) {
          const auto draw = sample_impossibility_prior(p, delta, spec.gamma_d, spec.r_n, to_seed(seed).child(b));
          good += draw.on_good_event ? 1.0 : 0.0;
          l1 += draw.first_half_l1;
        }
        const double b = static_cast<double>(mc_replications);
        j["monte_carlo"] = {{"draws", mc_replications}, {"good_event_rate", good / b}, {"mean_first_half_l1", l1 / b}};
      }
    } else {
      throw ConfigError("prior must be paired, sparse_twosided or impossibility, got '" + kind + "'");
    }
    emit(j, json);
  });
}

su_status su_verify(uint64_t d, uint64_t draws, uint64_t grid_size, uint64_t mc_replications, su_seed seed,
                    unsigned threads, int* passed, char** json) {
  if (!passed || !json) return fail(SU_ERR_NULL_ARGUMENT, "passed or out is NULL");
  return guarded([&] {
    bool all = true;
    Json variational = Json::array();
    Philox4x64 rng(to_seed(seed).child(0, 0xF0));
    std::uniform_real_distribution<double> c_dist(0.05, 0.95);
    std::uniform_real_distribution<double> a_dist(0.5, 1.0);
    for (std::uint64_t i = 0; i < draws; ++i) {
      const double c_star = c_dist(rng);
      const double alpha = a_dist(rng);
      const ProblemParams p = ProblemParams::from_alpha(d, d, alpha, 0.0);
      const VariationalCheck v = variational_check(p, c_star, grid_size);
      all = all && v.passed;
      variational.push_back({{"c_star", c_star}, {"s", p.s}, {"relative_gap", v.relative_gap}, {"passed", v.passed}});
    }
    Json second = Json::array();
    if (mc_replications > 0) {
      const ProblemParams triples[] = {{2, 4, 2, 0.0, 0.1}, {4, 8, 4, 0.0, 0.05}, {8, 16, 4, 0.0, 0.05}};
      PairedMcOptions opts;
      opts.threads = resolve_threads(threads);
      for (std::size_t i = 0; i < 3; ++i) {
        const ProblemParams& p = triples[i];
        const SecondMomentReport exact = paired_second_moment_exact(p);
        const SecondMomentReport mc = paired_second_moment_mc(p, mc_replications, to_seed(seed).child(i, 0x2A), opts);
        const bool agree = std::abs(mc.value - exact.value) <= 3.0 * *mc.se;
        const bool dominated = exact.value <= *exact.binomial_bound * (1.0 + 1e-12);
        all = all && agree && dominated;
        second.push_back({{"d", p.d},
                          {"s", p.s},
                          {"n", p.n},
                          {"epsilon", p.epsilon},
                          {"exact", exact.value},
                          {"binomial_bound", *exact.binomial_bound},
                          {"monte_carlo", mc.value},
                          {"se", *mc.se},
                          {"passed", agree && dominated}});
      }
    }
    *passed = all ? 1 : 0;
    emit({{"variational", variational}, {"second_moment", second}, {"passed", all}}, json);
  });
}

su_status su_phase_diagram(const char* config_path, const char* out_path, const char* format,
                           const su_seed* seed_override, unsigned threads, char** summary_json) {
  if (!config_path || !out_path) return fail(SU_ERR_NULL_ARGUMENT, "config or output path is NULL");
  return guarded([&] {
    PhaseGridSpec spec = load_phase_grid_spec(config_path);
    if (seed_override) spec.seed = to_seed(*seed_override);
    const PowerGrid grid = run_phase_diagram(spec, resolve_threads(threads));
    emit_grid(grid, out_path, parse_grid_format(format ? format : "csv"));
    if (summary_json) {
      std::size_t feasible = 0;
      for (const auto& c : grid.cells) feasible += c.feasible ? 1 : 0;
      emit({{"output", out_path},
            {"boundary", boundary_path(out_path).string()},
            {"cells", grid.cells.size()},
            {"feasible_cells", feasible},
            {"spec", to_json(spec)}},
           summary_json);
    }
  });
}

}  // extern "C"
