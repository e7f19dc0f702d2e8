#include <chrono>
#include <cstdio>
#include <cstring>

#include "qcoh/validation.hpp"

using namespace qcoh;

int main(int argc, char** argv) {
  SelftestOptions o;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) o.quick = true;
  using Fn = CheckResult (*)(const SelftestOptions&);
  const Fn criteria[] = {criterion_np_sdp,          criterion_closed_forms,    criterion_distill_extract,
                         criterion_assisted,        criterion_relations,       criterion_ns,
                         criterion_second_order,    criterion_hashing,         criterion_incoherent_bound,
                         criterion_strong_converse, criterion_framework_order, criterion_determinism};
  int failed = 0;
  for (Fn f : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = f(o);
    } catch (const std::exception& e) {
      r.pass = false;
      r.name = "exception";
      r.detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), secs,
                r.detail.c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  std::printf("%d/12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
