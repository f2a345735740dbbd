#include "phisum/phisum.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  phisum_config* cfg = nullptr;
  if (phisum_config_load(config.c_str(), &cfg) != PHISUM_OK) {
    std::cerr << "error: " << phisum_last_error() << "\n";
    return 1;
  }
  if (seed) phisum_config_set_seed(cfg, *seed);
  phisum_report* rep = nullptr;
  const auto st = phisum_run(cfg, &rep);
  phisum_config_free(cfg);
  if (st != PHISUM_OK) {
    std::cerr << "error: " << phisum_last_error() << "\n";
    return 1;
  }
  const int code = phisum_report_exit_code(rep);
  if (out.empty()) {
    std::cout << phisum_report_json(rep);
  } else {
    std::ofstream f(out, std::ios::binary);
    f << phisum_report_json(rep);
    if (!f) {
      std::cerr << "error: cannot write " << out << "\n";
      phisum_report_free(rep);
      return 1;
    }
  }
  phisum_report_free(rep);
  return code;
}

int verify(const std::vector<int>& ids) {
  phisum_suite* suite = nullptr;
  if (phisum_suite_run(ids.empty() ? nullptr : ids.data(), ids.size(), &suite) != PHISUM_OK) {
    std::cerr << "error: " << phisum_last_error() << "\n";
    return 1;
  }
  std::cout << phisum_suite_table(suite);
  const int code = phisum_suite_all_pass(suite) ? 0 : 1;
  phisum_suite_free(suite);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Summing-operator constants, certificates and factorizations"};
  app.set_version_flag("--version", std::string(phisum_version()));
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run an experiment config and write its report");
  std::string config, out;
  std::optional<std::uint64_t> seed;
  run_cmd->add_option("config", config, "experiment config (JSON)")->required();
  run_cmd->add_option("--out", out, "report path (default: stdout)");
  run_cmd->add_option("--seed", seed, "override solver.seed");

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria and print a table");
  std::vector<int> ids;
  verify_cmd->add_option("--filter", ids, "criterion id to run (repeatable)");

  CLI11_PARSE(app, argc, argv);
  if (*run_cmd) return run(config, out, seed);
  return verify(ids);
}
