#include <iostream>
#include <string>

#include "eqlab/acceptance.hpp"

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
int main(int argc, char** argv) {
  using namespace eqlab::acceptance;
  Scale scale = Scale::full;
  int jobs = 1;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--quick") scale = Scale::quick;
    else if (arg == "--full") scale = Scale::full;
    else if (arg == "--jobs" && i + 1 < argc) jobs = std::stoi(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--quick|--full] [--jobs N]\n";
      return 2;
    }
  }
  int failed = 0;
  run_all(scale, jobs, [&](const CheckResult& r) {
    failed += !r.passed;
    std::cout << format_line(r) << std::endl;
  });
  std::cout << (failed ? "FAILED: " + std::to_string(failed) + " criteria" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
