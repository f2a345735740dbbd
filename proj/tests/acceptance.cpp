// Runs every acceptance criterion and prints one line per criterion.

#include "phisum/verify_suite.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  phisum::SuiteOptions opt;
  for (int i = 1; i < argc; ++i) opt.filter.push_back(std::atoi(argv[i]));
  int failed = 0;
  const auto rows = phisum::verify_suite(opt, [&](const phisum::CriterionResult& r) {
    std::printf("%s\n", phisum::format_row(r).c_str());
    std::fflush(stdout);
    if (!r.pass()) ++failed;
  });
  std::printf("%zu/%zu criteria pass\n", rows.size() - static_cast<std::size_t>(failed), rows.size());
  return failed == 0 ? 0 : 1;
}
