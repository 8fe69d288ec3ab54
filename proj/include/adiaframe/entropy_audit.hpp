#pragma once

#include <cstdint>
#include <vector>

#include "adiaframe/adiabatic_frame.hpp"
#include "adiaframe/quantum_state.hpp"
#include "adiaframe/trajectory.hpp"

namespace adiaframe {

/// -k_B Tr(rho ln rho). Eigenvalues in [-tol, 0) are clipped to zero, with
/// 0 ln 0 = 0. A more negative eigenvalue is a validation error.
double von_neumann_entropy(const CMatrix& rho, double k_B = 1.0,
                           const ToleranceProfile& tol = default_tolerances());
inline double von_neumann_entropy(const QuantumState& s, double k_B = 1.0) {
  return von_neumann_entropy(s.rho(), k_B);
}

/// Complete family of mutually orthogonal projectors.
///
/// Named Projector (not P_k) to keep it apart from the connection operators.
class Projector {
 public:
  /// Rank-1 projectors |k><k| onto the standard basis, which in this library
  /// is always the adiabatic basis.
  static Projector adiabatic(Eigen::Index m);
  /// Rank-1 projectors onto the columns of a unitary.
  static Projector rank_one(const CMatrix& basis, const ToleranceProfile& tol = default_tolerances());
  /// General family; validated for idempotence, orthogonality, completeness.
  static Projector from_operators(std::vector<CMatrix> ops,
                                  const ToleranceProfile& tol = default_tolerances());

  Eigen::Index dim() const { return dim_; }
  const std::vector<CMatrix>& operators() const { return ops_; }
  bool is_standard_basis() const { return standard_; }

 private:
  Eigen::Index dim_ = 0;
  std::vector<CMatrix> ops_;
  bool standard_ = false;
};

/// rho -> sum_k P_k rho P_k.
CMatrix project(const CMatrix& rho, const Projector& family);

struct EntropyDelta {
  double before = 0.0;
  double after = 0.0;
  double delta() const { return after - before; }
};
/// Entropy change of the projection onto the adiabatic basis.
EntropyDelta entropy_delta(const CMatrix& rho, double k_B = 1.0);

/// Tr(rho_P f_k) for each coordinate, rho in the frame's adiabatic basis.
RVector projected_diabatic_force(const AdiabaticFrame& frame, const CMatrix& rho);

struct UnitaryInvarianceReport {
  double raw_drift = 0.0;       // max |S(t) - S(0)|
  double unexplained_drift = 0.0;  // same, after subtracting recorded projection jumps
  double projection_jump = 0.0; // sum of recorded projection entropy changes
};
/// Entropy drift along a run. Recorded projection events are accounted for
/// separately so the residual isolates the unitary part.
UnitaryInvarianceReport unitary_invariance_audit(const Trajectory& run);

struct MonotonicitySuite {
  std::size_t samples = 0;
  std::size_t passes = 0;
  double min_delta = 0.0;
  std::vector<EntropyDelta> draws;
};
/// Seeded random-state suite checking S(rho_P) - S(rho) >= -threshold.
MonotonicitySuite entropy_monotonicity_suite(Eigen::Index dim, std::size_t samples,
                                             std::uint64_t seed, double threshold = 1e-12);

}  // namespace adiaframe
