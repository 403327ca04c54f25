// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include "lsam/verify.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace {

struct Criterion {
  int id;
  const char* name;
  std::vector<const char*> suites;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "lower bound holds on the (alpha, eta, beta) grid", {"theorem1"}},
      {2, "tuned methods stay within epsilon on [N, 2N]", {"theorem2"}},
      {3, "h * (1 - rho) <= 8 on all branches", {"lemma2"}},
      {4, "variance sum dominates the closed-form floor", {"lemma1"}},
      {5, "Monte Carlo within 4 stderr of the exact oracle", {"mc"}},
      {6, "noiseless acceleration ratio in the sqrt(kappa) window", {"acceleration"}},
      {7, "matching orders across SGD, SHB, ASG", {"orders"}},
      {8, "heavy ball ahead when the step-size cap binds", {"remark5"}},
      {9, "asymptotic trace ratio and stationary correspondence", {"a2"}},
      {10, "spectral identities and power-norm bounds", {"spectral"}},
  };
  const lsam::GridResolution grid = lsam::GridResolution::fine();
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (const char* s : c.suites) {
      try {
        const auto rep = lsam::run_suite(s, grid);
        const auto* w = rep.worst();
        ok = ok && rep.passed();
        if (w)
          detail += std::string(s) + " rows=" + std::to_string(rep.rows.size()) +
                    " worst: " + w->quantity + " @ " + w->point +
                    " margin=" + fmt(w->margin);
      } catch (const std::exception& e) {
        ok = false;
        detail += std::string(s) + " threw: " + e.what();
      }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1fs) %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
