#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcoh/linalg.hpp"

namespace qcoh {

/// Product-form Kraus witness {A_i (x) B_i} for separable (quantum-)incoherent operations.
struct ProductWitness {
  std::vector<std::pair<Matrix, Matrix>> terms;
};

class KrausChannel {
 public:
  /// Throws NumericalError if sum K^dag K differs from I by more than tol (max entry).
  KrausChannel(std::vector<Matrix> kraus, SystemLayout in_layout, SystemLayout out_layout, double tol = 1e-10);

  [[nodiscard]] const std::vector<Matrix>& kraus() const { return kraus_; }
  [[nodiscard]] const SystemLayout& in_layout() const { return in_; }
  [[nodiscard]] const SystemLayout& out_layout() const { return out_; }
  [[nodiscard]] std::size_t din() const { return in_.dim(); }
  [[nodiscard]] std::size_t dout() const { return out_.dim(); }
  [[nodiscard]] Matrix apply(const Matrix& rho) const;
  [[nodiscard]] double completeness_residual() const;

  std::optional<ProductWitness> witness;

 private:
  std::vector<Matrix> kraus_;
  SystemLayout in_;
  SystemLayout out_;
};

using SuperOp = std::function<Matrix(const Matrix&)>;

/// J = sum_ij |i><j| (x) map(|i><j|), input index major.
Matrix choi(const SuperOp& map, std::size_t din);
Matrix choi(const KrausChannel& ch);

/// Zeroes off-diagonal entries on one tensor factor.
Matrix dephase(const Matrix& m, const SystemLayout& layout, const std::string& label);
DensityMatrix dephase(const DensityMatrix& rho, const std::string& label);
/// Full dephasing in the product basis.
Matrix dephase_all(const Matrix& m);

/// Maximally coherent state on a single factor labelled `label`.
PureState mcs(std::size_t d, const std::string& label = "L");

bool is_incoherent_kraus_op(const Matrix& k, double tol = 1e-10);

struct ClassCertificate {
  std::string class_name;
  bool verdict = false;
  std::vector<std::pair<std::string, double>> residuals;
  std::string witness;
  bool given_decomposition = false;
};

ClassCertificate check_MIO(const KrausChannel& ch);
ClassCertificate check_DIO(const KrausChannel& ch);
ClassCertificate check_IO_given_kraus(const KrausChannel& ch);
ClassCertificate check_DIIO(const KrausChannel& ch);
/// QI preservation with the incoherent party labelled b_in on the input and b_out on the output.
ClassCertificate check_QIP(const KrausChannel& ch, const std::string& b_in, const std::string& b_out);
ClassCertificate check_SI_kraus(const ProductWitness& w);
ClassCertificate check_SQI_kraus(const ProductWitness& w);

/// U = sum_b e^{i theta_b} |g(b)><b|.
KrausChannel incoherent_unitary(const std::vector<std::size_t>& perm, const std::vector<double>& phases,
                                const std::string& label = "B");

KrausChannel identity_channel(const SystemLayout& layout);
KrausChannel unitary_channel(const Matrix& u, const SystemLayout& layout);
KrausChannel dephasing_channel(const SystemLayout& layout);
/// Kraus operators of the channel that keeps every factor except `label`, which is dephased.
KrausChannel partial_dephasing_channel(const SystemLayout& layout, const std::string& label);
/// Kraus operators of the composition second o first.
KrausChannel compose(const KrausChannel& second, const KrausChannel& first);

}  // namespace qcoh
