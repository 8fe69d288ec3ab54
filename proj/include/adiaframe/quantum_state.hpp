#pragma once

#include "adiaframe/core.hpp"

namespace adiaframe {

/// Density matrix of the quantum object: unit trace, self-adjoint, positive
/// semidefinite. Pure states are built from amplitude vectors.
class QuantumState {
 public:
  QuantumState() = default;
  explicit QuantumState(CMatrix rho, const ToleranceProfile& tol = default_tolerances());

  /// |psi><psi| from amplitudes C_k; requires sum |C_k|^2 = 1.
  static QuantumState from_amplitudes(const CVector& c,
                                      const ToleranceProfile& tol = default_tolerances());
  static QuantumState maximally_mixed(Eigen::Index m);
  /// Diagonal state with the given populations.
  static QuantumState diagonal(const RVector& populations,
                               const ToleranceProfile& tol = default_tolerances());

  Eigen::Index dim() const { return rho_.rows(); }
  const CMatrix& rho() const { return rho_; }
  RVector populations() const { return rho_.diagonal().real(); }
  double purity() const;

 private:
  CMatrix rho_;
};

/// Throws ValidationError if any density-matrix invariant fails.
void validate_density_matrix(const CMatrix& rho, const ToleranceProfile& tol);

}  // namespace adiaframe
