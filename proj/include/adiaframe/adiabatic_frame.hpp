#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adiaframe/operator_core.hpp"

namespace adiaframe {

/// Object Hamiltonian H(x) parametrized by n apparatus coordinates.
///
/// When no analytic gradient is supplied, dH/dx^k is taken by centered
/// differences with step `fd_step[k]` (default 1e-5 of the coordinate scale).
class HamiltonianFamily {
 public:
  using Evaluate = std::function<CMatrix(const RVector&)>;
  using Gradient = std::function<std::vector<CMatrix>(const RVector&)>;

  HamiltonianFamily() = default;
  HamiltonianFamily(Eigen::Index n, Eigen::Index m, Evaluate evaluate, Gradient gradient = {},
                    double hbar = 1.0);

  Eigen::Index coordinates() const { return n_; }
  Eigen::Index dim() const { return m_; }
  double hbar() const { return hbar_; }
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

  const RVector& fd_step() const { return fd_step_; }
  /// Per-coordinate length scales; resets the difference step to 1e-5 * scale.
  void set_coordinate_scale(const RVector& scale);
  void set_fd_step(const RVector& step);

  HermitianOperator hamiltonian(const RVector& x,
                                const ToleranceProfile& tol = default_tolerances()) const;
  /// dH/dx^k for each coordinate, in the fixed (lab) basis.
  std::vector<CMatrix> derivative(const RVector& x) const;

 private:
  void check_coordinates(const RVector& x) const;

  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Evaluate evaluate_;
  Gradient gradient_;
  RVector fd_step_;
  double hbar_ = 1.0;
};

enum class ConnectionMethod { Perturbative, FiniteDifference };

/// Adiabatic frame at one apparatus configuration. All operators are stored
/// in the adiabatic basis (columns of spectrum.basis).
struct AdiabaticFrame {
  RVector x;
  Spectrum spectrum;
  std::vector<CMatrix> force_gradient;  // U^dag (dH/dx^k) U
  std::vector<CMatrix> connections;     // P_k = i hbar U^dag dU/dx^k
  ConnectionMethod method = ConnectionMethod::Perturbative;
  bool degenerate_flag = false;
  std::vector<std::string> warnings;
  double hbar = 1.0;

  const RVector& energies() const { return spectrum.eigenvalues; }
  const CMatrix& basis() const { return spectrum.basis; }
  Eigen::Index dim() const { return spectrum.dim(); }
  Eigen::Index coordinates() const { return static_cast<Eigen::Index>(connections.size()); }
};

/// Adiabatic (diagonal) and diabatic (zero-diagonal) parts of U^dag(-dH/dx^k)U.
struct ForcePair {
  std::vector<RVector> adiabatic;  // diagonal entries of F_k = -dW/dx^k
  std::vector<CMatrix> diabatic;   // f_k = -(i/hbar)[W, P_k]
  double decomposition_residual = 0.0;  // max_k ||U^dag F U - F_k - f_k|| / ||F||

  CMatrix adiabatic_operator(std::size_t k) const;
};

/// Off-diagonal P_ij = i hbar <i|dH|j> / (W_j - W_i), zero diagonal
/// (parallel-transport gauge). Throws DegeneracyError below the gap threshold.
std::vector<CMatrix> connection_ops_perturbative(const Spectrum& spectrum,
                                                 const std::vector<CMatrix>& force_gradient,
                                                 double hbar,
                                                 const ToleranceProfile& tol = default_tolerances());

/// P_k = i hbar U^dag [U(x + h e_k) - U(x - h e_k)] / 2h, Hermitized. The
/// displaced bases are continuity-matched to `spectrum.basis`.
std::vector<CMatrix> connection_ops_finite_difference(const HamiltonianFamily& fam,
                                                      const RVector& x, const Spectrum& spectrum,
                                                      const RVector& step,
                                                      const ToleranceProfile& tol = default_tolerances());

/// Completes a frame around an already gauge-fixed spectrum.
AdiabaticFrame frame_from_spectrum(const HamiltonianFamily& fam, const RVector& x,
                                   Spectrum spectrum,
                                   ConnectionMethod method = ConnectionMethod::Perturbative,
                                   const ToleranceProfile& tol = default_tolerances());

/// Diagonalizes H(x) (continuity-referenced to `prev` when given) and builds
/// the connection operators. A degenerate spectrum falls back to finite
/// differences and records a warning.
AdiabaticFrame build_frame(const HamiltonianFamily& fam, const RVector& x,
                           const AdiabaticFrame* prev = nullptr,
                           ConnectionMethod method = ConnectionMethod::Perturbative,
                           const ToleranceProfile& tol = default_tolerances());

ForcePair forces(const AdiabaticFrame& frame);

/// diag(W) - v^k P_k.
HermitianOperator moving_frame_hamiltonian(const AdiabaticFrame& frame, const RVector& v);

}  // namespace adiaframe
