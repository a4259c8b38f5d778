// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "sparse_unif/sparse_unif.h"

namespace {

// 0 success, 1 domain failure, 2 I/O or configuration failure.
int exit_code(su_status status) {
  switch (status) {
    case SU_OK: return 0;
    case SU_ERR_CONFIG:
    case SU_ERR_IO:
    case SU_ERR_NULL_ARGUMENT: return 2;
    default: return 1;
  }
}

int report(su_status status) {
  if (status != SU_OK) std::cerr << "error: " << su_last_error() << "\n";
  return exit_code(status);
}

int print_and_free(su_status status, char* json) {
  if (status == SU_OK && json) std::cout << json << "\n";
  su_string_free(json);
  return report(status);
}

struct Common {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  unsigned threads = 0;
  su_seed spec() const { return {seed, stream}; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Root seed");
  app->add_option("--stream", c.stream, "Stream id under the root seed");
  app->add_option("--threads", c.threads, "Worker threads (default: SPARSE_UNIF_THREADS or 1)");
}

struct ParamArgs {
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::optional<std::uint64_t> s;
  std::optional<double> alpha;
  double epsilon = 0.0;
};

void add_params(CLI::App* app, ParamArgs& p, bool need_nd) {
  auto* n = app->add_option("--n", p.n, "Sample size");
  auto* d = app->add_option("--d", p.d, "Domain size");
  if (need_nd) {
    n->required();
    d->required();
  }
  auto* s = app->add_option("--s", p.s, "Sparsity");
  app->add_option("--alpha", p.alpha, "Sparsity exponent, s = d^(1-alpha)")->excludes(s);
  app->add_option("--epsilon", p.epsilon, "L1 distance");
}

su_status resolve_params(const ParamArgs& a, su_params* out) {
  if (a.s) return su_params_from_sparsity(a.n, a.d, *a.s, a.epsilon, out);
  return su_params_from_alpha(a.n, a.d, a.alpha.value_or(1.0), a.epsilon, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse uniformity testing: statistics, thresholds, lower bounds and phase diagrams"};
  app.require_subcommand(1);
  Common common;

  // test
  auto* test = app.add_subcommand("test", "Run a test on a histogram (CSV row or JSON)");
  add_common(test, common);
  ParamArgs test_params;
  std::string input;
  su_test_options topt;
  su_test_options_default(&topt);
  std::string stat = "chisq", calibration = "monte_carlo", scheme = "multinomial";
  bool one_sided = false, normal_approx = false;
  test->add_option("--input", input, "Histogram file")->required();
  test->add_option("--stat", stat, "chisq | max_std | max_count | ghc | combined");
  test->add_option("--calibration", calibration, "analytic | monte_carlo");
  test->add_option("--level", topt.level, "Monte-Carlo level");
  test->add_option("--B", topt.replications, "Monte-Carlo null replications");
  test->add_option("--scheme", scheme, "multinomial | poissonized");
  test->add_option("--max-c", topt.max_c, "Max-test constant C > 1");
  test->add_flag("--one-sided", one_sided, "One-sided GHC");
  test->add_flag("--normal-approx", normal_approx, "Normal tail for GHC null probabilities");
  test->add_option("--n", test_params.n, "Sample size (default: from the histogram)");
  auto* ts = test->add_option("--s", test_params.s, "Sparsity");
  test->add_option("--alpha", test_params.alpha, "Sparsity exponent")->excludes(ts);
  test->add_option("--epsilon", test_params.epsilon, "L1 distance (analytic chi-square cutoff)");

  // thresholds
  auto* thr = app.add_subcommand("thresholds", "Detection thresholds and regime for (n, d, s)");
  add_common(thr, common);
  ParamArgs thr_params;
  add_params(thr, thr_params, true);

  // phase-diagram
  auto* phase = app.add_subcommand("phase-diagram", "Run a power phase diagram from a JSON config");
  add_common(phase, common);
  std::string config, out_path = "phase_grid.csv", format = "csv";
  phase->add_option("--config", config, "Config file")->required();
  phase->add_option("--out", out_path, "Output grid path");
  phase->add_option("--format", format, "csv | json");

  // lower-bound
  auto* lb = app.add_subcommand("lower-bound", "Second moment and risk lower bound of a prior");
  add_common(lb, common);
  ParamArgs lb_params;
  add_params(lb, lb_params, true);
  std::string prior = "paired";
  double delta = 0.1;
  std::uint64_t lb_mc = 0;
  lb->add_option("--prior", prior, "paired | sparse_twosided | impossibility");
  lb->add_option("--delta", delta, "Prior delta");
  lb->add_option("--mc", lb_mc, "Monte-Carlo replications (0: exact only)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Monte-Carlo null cutoff table");
  add_common(cal, common);
  ParamArgs cal_params;
  add_params(cal, cal_params, true);
  su_test_options copt;
  su_test_options_default(&copt);
  std::string cal_stat = "combined", cal_scheme = "multinomial";
  cal->add_option("--stat", cal_stat, "chisq | max_std | max_count | ghc | combined");
  cal->add_option("--level", copt.level, "Level");
  cal->add_option("--B", copt.replications, "Null replications");
  cal->add_option("--scheme", cal_scheme, "multinomial | poissonized");

  // verify
  auto* ver = app.add_subcommand("verify", "Variational identity and second-moment cross-checks");
  add_common(ver, common);
  std::uint64_t ver_d = 10000, ver_draws = 20, ver_grid = 4000, ver_mc = 100000;
  ver->add_option("--d", ver_d, "Domain size for the variational check");
  ver->add_option("--draws", ver_draws, "Random C* draws");
  ver->add_option("--grid", ver_grid, "Grid size (>= 1000)");
  ver->add_option("--mc", ver_mc, "Second-moment Monte-Carlo replications (0 skips)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  if (test->parsed()) {
    su_histogram* h = nullptr;
    su_status st = su_histogram_load(input.c_str(), scheme.c_str(), &h);
    if (st != SU_OK) return report(st);
    ParamArgs a = test_params;
    a.d = su_histogram_size(h);
    if (a.n == 0) a.n = su_histogram_n(h);
    su_params params;
    st = resolve_params(a, &params);
    if (st != SU_OK) {
      su_histogram_free(h);
      return report(st);
    }
    topt.statistic = stat.c_str();
    topt.calibration = calibration.c_str();
    topt.scheme = scheme.c_str();
    topt.seed = common.spec();
    topt.one_sided = one_sided;
    topt.normal_approximation = normal_approx;
    topt.threads = common.threads;
    su_test* t = nullptr;
    st = su_test_create(&params, &topt, &t);
    char* json = nullptr;
    if (st == SU_OK) st = su_test_evaluate(t, h, &json);
    su_test_free(t);
    su_histogram_free(h);
    return print_and_free(st, json);
  }
  if (thr->parsed()) {
    su_params params;
    su_status st = resolve_params(thr_params, &params);
    char* json = nullptr;
    if (st == SU_OK) st = su_thresholds(&params, &json);
    return print_and_free(st, json);
  }
  if (phase->parsed()) {
    const su_seed seed = common.spec();
    const bool override_seed = phase->count("--seed") > 0 || phase->count("--stream") > 0;
    char* json = nullptr;
    const su_status st = su_phase_diagram(config.c_str(), out_path.c_str(), format.c_str(),
                                          override_seed ? &seed : nullptr, common.threads, &json);
    return print_and_free(st, json);
  }
  if (lb->parsed()) {
    su_params params;
    su_status st = resolve_params(lb_params, &params);
    char* json = nullptr;
    if (st == SU_OK) st = su_lower_bound(&params, prior.c_str(), delta, lb_mc, common.spec(), common.threads, &json);
    return print_and_free(st, json);
  }
  if (cal->parsed()) {
    su_params params;
    su_status st = resolve_params(cal_params, &params);
    copt.statistic = cal_stat.c_str();
    copt.calibration = "monte_carlo";
    copt.scheme = cal_scheme.c_str();
    copt.seed = common.spec();
    copt.threads = common.threads;
    su_test* t = nullptr;
    if (st == SU_OK) st = su_test_create(&params, &copt, &t);
    char* json = nullptr;
    if (st == SU_OK) st = su_test_cutoffs(t, &json);
    su_test_free(t);
    return print_and_free(st, json);
  }
  if (ver->parsed()) {
    int passed = 0;
    char* json = nullptr;
    su_status st = su_verify(ver_d, ver_draws, ver_grid, ver_mc, common.spec(), common.threads, &passed, &json);
    const int code = print_and_free(st, json);
    return code != 0 ? code : (passed ? 0 : 1);
  }
  return 2;
}
