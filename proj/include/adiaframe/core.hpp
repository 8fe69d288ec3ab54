#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace adiaframe {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Error taxonomy. Every error carries a short machine-readable kind so the
// CLI can emit structured error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};
struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& what) : Error("degeneracy", what) {}
};
struct StepSizeError : Error {
  explicit StepSizeError(const std::string& what) : Error("step_size", what) {}
};

/// Every numeric threshold used by validation and invariant checks.
///
/// The values of the "default" profile are the ones the library is tested
/// against. "strict" tightens checks by 10x, "loose" relaxes them by 100x.
struct ToleranceProfile {
  double hermiticity = 1e-12;      // relative to max-magnitude entry
  double unitarity = 1e-10;        // Frobenius norm of U^dag U - I
  double reconstruction = 1e-10;   // relative eigen reconstruction residual
  double imaginary_residual = 1e-12;
  double degeneracy_gap = 1e-9;    // relative to spectral range
  double trace = 1e-10;
  double positivity = 1e-10;
  double trace_drift_per_step = 1e-8;
  double ledger_relative = 1e-6;
  double ledger_floor = 1e-12;     // absolute floor for the ledger residual scale
  double entropy_drift = 1e-7;
  double entropy_negative_eigenvalue = 1e-8;
  double projector = 1e-12;
  double corrector = 1e-13;        // fixed-point convergence of the classical step
  int corrector_max_iterations = 100;

  static ToleranceProfile named(std::string_view name);
  /// Profile named by ADIAFRAME_TOLERANCE_PROFILE, or the default.
  static ToleranceProfile from_environment();
};

const ToleranceProfile& default_tolerances();

}  // namespace adiaframe
