// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Runtimes are reported per criterion.

#include <chrono>
#include <cstdio>

#include "criteria.hpp"

std::vector<Criterion>& registry() {
  static std::vector<Criterion> r;
  return r;
}

int main() {
  register_criteria();
  int failed = 0;
  for (const Criterion& c : registry()) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      note = std::string(" (exception: ") + e.what() + ")";
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %s (%.1f s)%s\n", ok ? "PASS" : "FAIL", c.name.c_str(),
                seconds, note.c_str());
    std::fflush(stdout);
    failed += !ok;
  }
  if (failed > 0) {
    std::printf("%d criterion(s) failed\n", failed);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
