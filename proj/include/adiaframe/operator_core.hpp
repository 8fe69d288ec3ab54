#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "adiaframe/core.hpp"

namespace adiaframe {

/// Dense complex self-adjoint matrix. Construction validates Hermiticity
/// against the tolerance profile; the stored matrix is exactly Hermitian
/// (the residual below tolerance is symmetrized away).
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(CMatrix m, const ToleranceProfile& tol = default_tolerances());

  /// Hermitian part (A + A^dag)/2 of an arbitrary square matrix, no validation.
  static HermitianOperator hermitian_part(const CMatrix& a);
  static HermitianOperator diagonal(const RVector& d);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  struct Trusted {};
  HermitianOperator(CMatrix m, Trusted) : m_(std::move(m)) {}
  CMatrix m_;
};

/// Max-magnitude-relative self-adjointness residual of a square matrix.
double hermiticity_residual(const CMatrix& a);
/// Frobenius norm of U^dag U - I.
double unitarity_residual(const CMatrix& u);

/// Eigenvalues and gauge-fixed eigenbasis of a Hermitian operator.
///
/// Column k of `basis` is the eigenvector of `eigenvalues[k]`. Without a
/// continuity reference the eigenvalues are ascending. With a reference the
/// columns follow the reference labels and `permutation[k]` is the ascending
/// rank of the eigenvalue now stored in column k.
struct Spectrum {
  RVector eigenvalues;
  CMatrix basis;
  std::vector<Eigen::Index> permutation;
  bool degenerate = false;

  Eigen::Index dim() const { return eigenvalues.size(); }
  bool reordered() const;
};

/// Eigendecomposition with deterministic gauge fixing.
///
/// Without reference: each eigenvector's largest-magnitude component is made
/// real and positive (first index wins ties). With reference: columns are
/// matched to the reference by maximal |overlap| and rephased so the overlap
/// with their reference column is real and positive. Within degenerate
/// subspaces the block is rotated onto the reference block (polar alignment).
Spectrum hermitian_eig(const HermitianOperator& h, const CMatrix* reference = nullptr,
                       const ToleranceProfile& tol = default_tolerances());

inline Spectrum hermitian_eig(const HermitianOperator& h, const CMatrix& reference,
                              const ToleranceProfile& tol = default_tolerances()) {
  return hermitian_eig(h, &reference, tol);
}

/// AB - BA. Anti-Hermitian when both arguments are Hermitian.
CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// Tr(rho A) for a density matrix and a Hermitian observable. The imaginary
/// residual is checked against the tolerance and then discarded.
double expectation(const CMatrix& rho, const CMatrix& a,
                   const ToleranceProfile& tol = default_tolerances());

/// basis * diag(f(eigenvalues)) * basis^dag; exact for diagonal input.
HermitianOperator spectral_function(const HermitianOperator& h,
                                    const std::function<double(double)>& f,
                                    const ToleranceProfile& tol = default_tolerances());

namespace pauli {
CMatrix identity();
CMatrix x();
CMatrix y();
CMatrix z();
}  // namespace pauli

}  // namespace adiaframe
