#include "phisum/phisum.h"

#include "phisum/experiment.hpp"
#include "phisum/linear_summing.hpp"
#include "phisum/verify_suite.hpp"

#include <string>
#include <vector>

struct phisum_config {
  phisum::ExperimentConfig cfg;
  std::string json;
};

struct phisum_report {
  phisum::RunResult result;
};

struct phisum_suite {
  std::vector<phisum::CriterionResult> rows;
  std::vector<std::string> lines;
  std::string table;
};

namespace {

thread_local std::string last_error;

template <class F>
phisum_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return PHISUM_OK;
  } catch (const phisum::Error& e) {
    last_error = e.what();
    return static_cast<phisum_status>(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return PHISUM_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PHISUM_INTERNAL;
  }
}

phisum_status null_arg(const char* what) {
  last_error = std::string(what) + " is null";
  return PHISUM_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* phisum_version(void) { return phisum::kVersion; }

const char* phisum_last_error(void) { return last_error.c_str(); }

phisum_status phisum_config_load(const char* path, phisum_config** out) {
  if (!path || !out) return null_arg("argument");
  return guard([&] {
    auto c = phisum::load_config(path);
    *out = new phisum_config{c, phisum::config_to_json(c)};
  });
}

phisum_status phisum_config_parse(const char* text, const char* source, phisum_config** out) {
  if (!text || !out) return null_arg("argument");
  return guard([&] {
    auto c = phisum::parse_config(text, source ? source : "config");
    *out = new phisum_config{c, phisum::config_to_json(c)};
  });
}

phisum_status phisum_config_set_seed(phisum_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("config");
  cfg->cfg.solver.seed = seed;
  cfg->json = phisum::config_to_json(cfg->cfg);
  return PHISUM_OK;
}

const char* phisum_config_json(const phisum_config* cfg) { return cfg ? cfg->json.c_str() : ""; }

void phisum_config_free(phisum_config* cfg) { delete cfg; }

phisum_status phisum_run(const phisum_config* cfg, phisum_report** out) {
  if (!cfg || !out) return null_arg("argument");
  return guard([&] { *out = new phisum_report{phisum::run_experiment(cfg->cfg)}; });
}

int phisum_report_exit_code(const phisum_report* rep) { return rep ? rep->result.exit_code : 1; }

const char* phisum_report_json(const phisum_report* rep) { return rep ? rep->result.report.c_str() : ""; }

void phisum_report_free(phisum_report* rep) { delete rep; }

phisum_status phisum_suite_run(const int* ids, size_t count, phisum_suite** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    phisum::SuiteOptions opt;
    if (ids) opt.filter.assign(ids, ids + count);
    auto s = new phisum_suite{phisum::verify_suite(opt), {}, {}};
    for (const auto& r : s->rows) s->lines.push_back(phisum::format_row(r));
    s->table = phisum::format_table(s->rows);
    *out = s;
  });
}

size_t phisum_suite_size(const phisum_suite* suite) { return suite ? suite->rows.size() : 0; }

phisum_status phisum_suite_row(const phisum_suite* suite, size_t index, int* id, int* pass, double* value,
                               double* tol) {
  if (!suite) return null_arg("suite");
  if (index >= suite->rows.size()) {
    last_error = "row index out of range";
    return PHISUM_INVALID_ARGUMENT;
  }
  const auto& r = suite->rows[index];
  if (id) *id = r.id;
  if (pass) *pass = r.pass() ? 1 : 0;
  if (value) *value = r.checks.empty() ? 0.0 : r.checks.front().value;
  if (tol) *tol = r.checks.empty() ? 0.0 : r.checks.front().tol;
  return PHISUM_OK;
}

const char* phisum_suite_line(const phisum_suite* suite, size_t index) {
  if (!suite || index >= suite->lines.size()) return "";
  return suite->lines[index].c_str();
}

const char* phisum_suite_table(const phisum_suite* suite) { return suite ? suite->table.c_str() : ""; }

int phisum_suite_all_pass(const phisum_suite* suite) {
  if (!suite || suite->rows.empty()) return 0;
  for (const auto& r : suite->rows)
    if (!r.pass()) return 0;
  return 1;
}

void phisum_suite_free(phisum_suite* suite) { delete suite; }

phisum_status phisum_summing_lq(int n, double q_in, int m, double q_out, const double* coeffs, double r,
                                double* lower, double* upper, int* certified) {
  if (!coeffs) return null_arg("coeffs");
  return guard([&] {
    using namespace phisum;
    if (n < 1 || m < 1) throw Error(ErrorCode::invalid_argument, "dimensions must be positive");
    const auto X = FiniteSpace::lq(n, q_in), Y = FiniteSpace::lq(m, q_out);
    Matrix A(m, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < m; ++k) A(k, i) = coeffs[i * m + k];
    const auto rep = summing_constant(LinearMap(X, Y, A), PhiMap::identity(X), r);
    if (lower) *lower = rep.lower_bound;
    if (upper) *upper = rep.upper_bound;
    if (certified) *certified = rep.certified() ? 1 : 0;
  });
}

}  // extern "C"
