#include "adiaframe/quantum_state.hpp"

#include <cmath>
#include <sstream>

#include "adiaframe/operator_core.hpp"

namespace adiaframe {

void validate_density_matrix(const CMatrix& rho, const ToleranceProfile& tol) {
  if (rho.rows() < 1 || rho.rows() != rho.cols())
    throw ValidationError("density matrix must be square with dim >= 1");
  if (!rho.allFinite()) throw ValidationError("density matrix has non-finite entries");
  const double herm = hermiticity_residual(rho);
  if (herm > tol.hermiticity) {
    std::ostringstream os;
    os << "density matrix is not self-adjoint (residual " << herm << ")";
    throw ValidationError(os.str());
  }
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    std::ostringstream os;
    os << "density matrix trace " << tr.real() << " differs from 1 by " << std::abs(tr - 1.0);
    throw ValidationError(os.str());
  }
  const CMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("density matrix eigensolver failed");
  if (es.eigenvalues()(0) < -tol.positivity) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << es.eigenvalues()(0);
    throw ValidationError(os.str());
  }
}

QuantumState::QuantumState(CMatrix rho, const ToleranceProfile& tol) {
  validate_density_matrix(rho, tol);
  rho_ = 0.5 * (rho + rho.adjoint());
}

QuantumState QuantumState::from_amplitudes(const CVector& c, const ToleranceProfile& tol) {
  if (c.size() < 1) throw ValidationError("amplitude vector is empty");
  const double norm2 = c.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol.trace) {
    std::ostringstream os;
    os << "amplitudes are not normalized: sum |C_k|^2 = " << norm2;
    throw ValidationError(os.str());
  }
  return QuantumState(CMatrix(c * c.adjoint()), tol);
}

QuantumState QuantumState::maximally_mixed(Eigen::Index m) {
  if (m < 1) throw ValidationError("maximally_mixed needs dim >= 1");
  QuantumState s;
  s.rho_ = CMatrix::Identity(m, m) / static_cast<double>(m);
  return s;
}

QuantumState QuantumState::diagonal(const RVector& populations, const ToleranceProfile& tol) {
  return QuantumState(CMatrix(populations.cast<Complex>().asDiagonal()), tol);
}

double QuantumState::purity() const { return (rho_ * rho_).trace().real(); }

}  // namespace adiaframe
