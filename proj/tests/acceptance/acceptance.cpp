#include <cstdio>

#include "statgeo/battery.hpp"

int main() {
  const auto results = statgeo::run_battery();
  int failed = 0;
  for (const auto& r : results) {
    const bool ok = r.pass() && r.seconds < r.runtime_limit;
    if (!ok) ++failed;
    std::printf("%s %-24s %7.3fs (limit %gs)\n", ok ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.runtime_limit);
    if (!r.error.empty()) std::printf("     error: %s\n", r.error.c_str());
    for (const auto& c : r.checks) {
      if (!c.pass()) {
        std::printf("     %s: %.3e %s %.3e\n", c.name.c_str(), c.residual, c.at_least ? "<" : ">", c.tolerance);
      }
    }
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
