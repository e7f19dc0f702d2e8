#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcoh/coherence.hpp"
#include "qcoh/linalg.hpp"

namespace qcoh {

/// Total map {0..in_size-1} -> {0..out_size-1}; need not be surjective.
class HashFunction {
 public:
  HashFunction(std::vector<std::size_t> table, std::size_t out_size);
  static HashFunction identity(std::size_t n);

  [[nodiscard]] const std::vector<std::size_t>& table() const { return table_; }
  [[nodiscard]] std::size_t in_size() const { return table_.size(); }
  [[nodiscard]] std::size_t out_size() const { return out_; }
  [[nodiscard]] std::size_t operator()(std::size_t c) const { return table_.at(c); }
  /// f o g for a map g into this function's domain.
  [[nodiscard]] HashFunction after(const std::vector<std::size_t>& g) const;

  friend bool operator==(const HashFunction&, const HashFunction&) = default;

 private:
  std::vector<std::size_t> table_;
  std::size_t out_;
};

/// Purified distances whose 1 - F^2 falls below this are reported as exactly zero; F itself is only
/// resolved to a few ulp, so smaller values carry no information.
inline constexpr double kPdFloor = 1e-13;
double pd_from_fidelity(double f);

struct DSecOptions {
  int max_iter = 20000;
  double gap_tol = 1e-7;
  /// Run the fidelity SDP as well when |X| * rank(rho_R) is at most sdp_max_dim.
  bool sdp_cross_check = false;
  std::size_t sdp_max_dim = 8;
};

struct DSecResult {
  double value = 0.0;   // min_sigma P(rho_XR, pi_X (x) sigma_R)
  double fidelity = 0.0;
  Matrix sigma_star;    // optimizer on R
  double gap = 0.0;     // certified bound on max_sigma F - fidelity
  int iterations = 0;
  bool certified = false;
  std::string method;   // "ascent" or "sdp"
};

/// d_sec with X the factor `x_label` and R every other factor (in layout order).
DSecResult d_sec(const DensityMatrix& rho_xr, const std::string& x_label, const DSecOptions& opt = {});
/// d_sec of the CQ state sum_x |x><x| (x) blocks[x]; the blocks are subnormalized operators on R.
DSecResult d_sec_cq(std::span<const Matrix> blocks, const DSecOptions& opt = {});

struct Isometry {
  Matrix v;
  SystemLayout in;
  SystemLayout out;  // channel output factors followed by the environment
};

/// V = sum_k K_k (x) |k>_E; the environment has one level per Kraus operator.
Isometry stinespring(const KrausChannel& ch, const std::string& env_label = "E");

struct ExtractionOutcome {
  DensityMatrix output_state;  // (L, E, R), or (A', L, E, R) in the assisted framework
  double d_sec = 0.0;
  double log_L = 0.0;
  Matrix sigma_star;  // on (E, R)
  double gap = 0.0;
  HashFunction f;
};

/// Pipeline (Lambda, Delta, f) on rho_B: purify to (B, R), dilate, dephase C, hash, d_sec against (E, R).
ExtractionOutcome run_extraction(const DensityMatrix& rho_b, const KrausChannel& lambda, const HashFunction& f,
                                 const DSecOptions& opt = {});
/// Assisted pipeline: rho_AB purified to (A, B, R); Lambda maps AB to A'B' with Bob's output factor `b_out`;
/// d_sec is taken against (E, R) only.
ExtractionOutcome run_assisted_extraction(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                          const HashFunction& f, const std::string& b_out = "B",
                                          const DSecOptions& opt = {});
/// Alternative assisted pipeline: Lambda maps AB entirely to Bob's C.
ExtractionOutcome run_alternative_assisted_extraction(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                                      const HashFunction& f, const DSecOptions& opt = {});

struct HashSearchOptions {
  std::size_t max_exhaustive = 6;
  bool sampled = false;  // allow the multiply-shift family above max_exhaustive
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  /// Slack on d_sec <= eps, absorbing the resolution of P near zero.
  double accept_tol = 1e-9;
  DSecOptions dsec;
};

struct HashSearchResult {
  double log_L = 0.0;
  HashFunction best_f{{0}, 1};
  double d_sec = 0.0;
  bool sampled = false;
  std::size_t evaluated = 0;
};

/// Largest |L| with some f achieving d_sec <= eps; ties go to the lexicographically first table.
/// `c_blocks[c]` is Eve's unnormalized conditional state for Bob's letter c.
HashSearchResult search_hash(std::span<const Matrix> c_blocks, double eps, const HashSearchOptions& opt = {});
HashSearchResult extractable_randomness_exhaustive(const DensityMatrix& rho_b, const KrausChannel& lambda,
                                                   double eps, const HashSearchOptions& opt = {});
HashSearchResult assisted_extractable_randomness(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                                 double eps, const std::string& b_out = "B",
                                                 const HashSearchOptions& opt = {});
HashSearchResult alternative_extractable_randomness(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                                    double eps, const HashSearchOptions& opt = {});

/// Eve's conditional blocks for the three frameworks (index c over Bob's register).
std::vector<Matrix> extraction_blocks(const DensityMatrix& rho_b, const KrausChannel& lambda);
std::vector<Matrix> assisted_extraction_blocks(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                               const std::string& b_out = "B");

struct DistillerReport {
  KrausChannel channel;
  std::vector<ClassCertificate> certificates;
  double error_P = 0.0;
  std::size_t target_dim = 0;
  double achieved_d_sec = 0.0;
  Matrix sigma_star;
  double fidelity_lower = 0.0;  // F(rho[id,Delta,f], pi_L (x) sigma*)
};

/// Converts an extraction protocol (id, Delta, f) on rho_B into a DIIO distiller rho_B -> Psi_L.
DistillerReport build_distiller_from_extraction(const DensityMatrix& rho_b, const HashFunction& f, double eps,
                                                const DSecOptions& opt = {});
/// Assisted analogue on rho_AB (factors "A" and "B"); the distiller AB -> L is certified QIP.
DistillerReport build_assisted_distiller(const DensityMatrix& rho_ab, const HashFunction& f, double eps,
                                         const DSecOptions& opt = {});

enum class FreeClass { QIP, SI, SQI };

/// One-way local round structure: Alice applies the instrument {alice[x]} and announces x, Bob applies bob[x].
struct OneWayRounds {
  std::vector<std::vector<Matrix>> alice;
  std::vector<KrausChannel> bob;
  bool alice_incoherent = false;  // LICC when true, LQICC otherwise

  [[nodiscard]] KrausChannel to_channel() const;
};

struct Composite {
  KrausChannel channel;
  ClassCertificate certificate;
};

ClassCertificate validate_rounds(const OneWayRounds& r);

/// Gamma o Lambda with Gamma acting on Lambda's output factor `b_out`. Gamma must be certified DIIO.
Composite compose_and_certify(const KrausChannel& lambda, FreeClass cls, const KrausChannel& gamma,
                              const std::string& b_out = "B");
/// Last-round surgery: every bob[x] is replaced by Gamma o bob[x].
Composite compose_and_certify(const OneWayRounds& lambda, const KrausChannel& gamma);

struct NamedChannel {
  std::string name;
  KrausChannel channel;
};

/// Ten fixed two-qubit channels AB -> A'B' (factors "A", "B") used for the framework comparison.
std::vector<NamedChannel> two_qubit_family();
/// tr_{A'} o Lambda as an AB -> C channel.
KrausChannel trace_out_alice(const KrausChannel& lambda, const std::string& b_out = "B");

}  // namespace qcoh
