#include "doctest.h"

#include "phisum/experiment.hpp"
#include "phisum/phisum.h"
#include "phisum/types.hpp"
#include "phisum/verify_suite.hpp"

#include <json.hpp>

#include <cmath>
#include <string>

using namespace phisum;
using nlohmann::json;

namespace {
const std::string dir = PHISUM_CONFIG_DIR;

std::string parse_message(const std::string& text) {
  try {
    parse_config(text, "cfg");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
    return e.what();
  }
  return "";
}

const char* kSumming = R"({
  "schema": 1,
  "task": "summing",
  "spaces": [{"name": "X", "kind": "lq", "dim": 2, "q": 1}],
  "operators": [{"name": "id", "domain": "X", "codomain": "X", "coefficients": [1, 0, 0, 1]}],
  "operator": "id",
  "exponents": {"p": 1}
})";
}  // namespace

TEST_CASE("config errors are line anchored") {
  CHECK(parse_message("{\n  \"schema\": 1,\n  \"task\": ,\n}").rfind("cfg:3:", 0) == 0);
  CHECK(parse_message("{\n  \"schema\": 1,\n  \"task\": \"summing\",\n  \"tsak\": 2\n}") ==
        "cfg:4:11: unknown key \"tsak\"");
  std::string bad = kSumming;
  bad.replace(bad.find("[1, 0, 0, 1]"), 12, "[1, 0, 0]");
  CHECK(parse_message(bad) == "cfg:5:80: expected 4 coefficients, got 3");
  bad = kSumming;
  bad.replace(bad.find("\"schema\": 1"), 11, "\"schema\": 2");
  CHECK(parse_message(bad) == "cfg:2:13: unsupported schema 2");
  bad = kSumming;
  bad.replace(bad.find("\"operator\": \"id\""), 16, "\"operator\": \"T\"");
  CHECK(parse_message(bad) == "cfg:6:15: unknown operator \"T\"");
  CHECK(parse_message("{\"schema\": 1}") == "cfg:1:1: missing \"task\"");
}

TEST_CASE("exponent identity is validated") {
  const auto msg = [] {
    try {
      load_config(dir + "/bad_exponents.json");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  }();
  CHECK(msg.find("exponent identity violated") != std::string::npos);
  CHECK(msg.find("bad_exponents.json:16:") != std::string::npos);
  CHECK_NOTHROW(load_config(dir + "/multi_ideal_product.json"));
}

TEST_CASE("echoed configs parse back to the same config") {
  for (const char* name : {"summing_id_l1", "dimant_sigma0", "strongly_identity", "multi_ideal_product",
                           "factorize_sigma", "factorize_polytope", "verify_quick"}) {
    const auto c = load_config(dir + "/" + name + ".json");
    const auto echo = config_to_json(c);
    CHECK(parse_config(echo) == c);
    CHECK(config_to_json(parse_config(echo)) == echo);
  }
}

TEST_CASE("summing task on the identity of l_1^2") {
  const auto c = parse_config(kSumming);
  const auto a = run_experiment(c);
  CHECK(a.exit_code == 0);
  const auto j = json::parse(a.report);
  CHECK(j["status"] == "certified");
  CHECK(std::abs(j["result"]["summing"]["lower"].get<double>() - 2.0) <= 1e-6);
  CHECK(std::abs(j["result"]["summing"]["upper"].get<double>() - 2.0) <= 1e-6);
  CHECK(parse_config(j["config"].dump()) == c);
  CHECK(run_experiment(c).report == a.report);
  CHECK(j.find("timings") == j.end());
}

TEST_CASE("task errors and gap-open results") {
  auto c = parse_config(kSumming);
  c.solver.max_iter = 1;
  c.spaces[0].q = 2.0;
  CHECK(run_experiment(c).exit_code == 2);
  c = parse_config(kSumming);
  c.phi.kind = "anchored";
  c.phi.anchor = {0.0, 0.0};
  const auto bad = run_experiment(c);
  CHECK(bad.exit_code == 1);
  CHECK(json::parse(bad.report)["status"] == "error");
}

TEST_CASE("dimant at sigma 0 against the strongly task") {
  // Dimant rows are single elementary tensors, so its constant never exceeds
  // the strongly identity constant; the two agree on rank-one maps.
  const auto d = run_experiment(load_config(dir + "/dimant_sigma0.json"));
  const auto s = run_experiment(load_config(dir + "/strongly_identity.json"));
  REQUIRE(d.exit_code == 0);
  REQUIRE(s.exit_code == 0);
  const double du = json::parse(d.report)["result"]["sigma_report"]["summary"]["upper"].get<double>();
  const double su = json::parse(s.report)["result"]["summing"]["upper"].get<double>();
  CHECK(du <= su + 1e-6);

  auto rd = load_config(dir + "/dimant_sigma0.json");
  rd.operators[0].coefficients = {2.0, -1.0, 0, 0, 0, 0, 0, 0};
  auto rs = load_config(dir + "/strongly_identity.json");
  rs.operators[0].coefficients = rd.operators[0].coefficients;
  const double a = json::parse(run_experiment(rd).report)["result"]["sigma_report"]["summary"]["upper"].get<double>();
  const double b = json::parse(run_experiment(rs).report)["result"]["summing"]["upper"].get<double>();
  CHECK(std::abs(a - 2.0) <= 1e-6);
  CHECK(std::abs(a - b) <= 1e-6);
}

TEST_CASE("verify suite harness") {
  const auto rows = verify_suite(SuiteOptions{{6}, {}});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].id == 6);
  CHECK(rows[0].pass());
  const auto zero = run_criterion(1, SuiteOptions{{}, 0.0});
  CHECK_FALSE(zero.pass());
  CHECK(zero.checks[0].tol == 0.0);
  CHECK_FALSE(run_criterion(99).pass());
  const auto line = format_row(rows[0]);
  CHECK(line.rfind(" 6  PASS  value=", 0) == 0);
}

TEST_CASE("c api") {
  phisum_config* cfg = nullptr;
  CHECK(phisum_config_parse("{\n\"schema\": 1,\n\"task\": 3}", "x", &cfg) == PHISUM_PARSE_ERROR);
  CHECK(std::string(phisum_last_error()) == "x:3:9: expected a string");
  CHECK(cfg == nullptr);
  CHECK(phisum_config_load("/nonexistent.json", &cfg) == PHISUM_INVALID_ARGUMENT);

  REQUIRE(phisum_config_parse(kSumming, "x", &cfg) == PHISUM_OK);
  CHECK(phisum_config_set_seed(cfg, 42) == PHISUM_OK);
  CHECK(json::parse(phisum_config_json(cfg))["solver"]["seed"] == 42);
  phisum_report* rep = nullptr;
  REQUIRE(phisum_run(cfg, &rep) == PHISUM_OK);
  CHECK(phisum_report_exit_code(rep) == 0);
  CHECK(json::parse(phisum_report_json(rep))["environment"]["seed"] == 42);
  phisum_report_free(rep);
  phisum_config_free(cfg);
  CHECK(phisum_run(nullptr, &rep) == PHISUM_INVALID_ARGUMENT);

  const double id[] = {1, 0, 0, 1};
  double lo = 0, hi = 0;
  int cert = 0;
  REQUIRE(phisum_summing_lq(2, 1.0, 2, 1.0, id, 1.0, &lo, &hi, &cert) == PHISUM_OK);
  CHECK(cert == 1);
  CHECK(hi == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(phisum_summing_lq(0, 1.0, 2, 1.0, id, 1.0, &lo, &hi, &cert) == PHISUM_INVALID_ARGUMENT);

  const int ids[] = {6};
  phisum_suite* suite = nullptr;
  REQUIRE(phisum_suite_run(ids, 1, &suite) == PHISUM_OK);
  CHECK(phisum_suite_size(suite) == 1);
  int rid = 0, pass = 0;
  CHECK(phisum_suite_row(suite, 0, &rid, &pass, nullptr, nullptr) == PHISUM_OK);
  CHECK(rid == 6);
  CHECK(pass == 1);
  CHECK(phisum_suite_all_pass(suite) == 1);
  CHECK(phisum_suite_row(suite, 3, &rid, &pass, nullptr, nullptr) == PHISUM_INVALID_ARGUMENT);
  phisum_suite_free(suite);
}
