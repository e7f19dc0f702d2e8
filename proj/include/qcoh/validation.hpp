#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qcoh {

struct CheckResult {
  int id = 0;  // acceptance criterion number; 0 for module invariants
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SelftestOptions {
  std::uint64_t seed = 20240101;
  bool quick = false;
  /// Biases the Neyman-Pearson values fed to the NP checks so the failure path can be exercised.
  bool corrupt = false;
};

CheckResult criterion_np_sdp(const SelftestOptions& o);
CheckResult criterion_closed_forms(const SelftestOptions& o);
CheckResult criterion_distill_extract(const SelftestOptions& o);
CheckResult criterion_assisted(const SelftestOptions& o);
CheckResult criterion_relations(const SelftestOptions& o);
CheckResult criterion_ns(const SelftestOptions& o);
CheckResult criterion_second_order(const SelftestOptions& o);
CheckResult criterion_hashing(const SelftestOptions& o);
CheckResult criterion_incoherent_bound(const SelftestOptions& o);
CheckResult criterion_strong_converse(const SelftestOptions& o);
CheckResult criterion_framework_order(const SelftestOptions& o);
/// Two selftest runs at the same options must produce identical reports.
CheckResult criterion_determinism(const SelftestOptions& o);

/// Criteria 1-11 followed by the module invariants.
std::vector<CheckResult> run_selftest(const SelftestOptions& o);
std::string format_report(const SelftestOptions& o, const std::vector<CheckResult>& results);
std::string selftest_report(const SelftestOptions& o);
bool all_pass(const std::vector<CheckResult>& results);

}  // namespace qcoh
