#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "adiaframe/dynamics.hpp"

namespace adiaframe {

/// Spin-1/2 neutral atom crossing an inhomogeneous magnetic field.
///
/// Units are natural (hbar = 1 unless overridden). The default field is the
/// divergence-free gradient field B = (-b x, 0, B0 + b z).
struct SternGerlachConfig {
  double gamma = 1.0;  // gyromagnetic ratio
  double mass = 1.0;
  double hbar = 1.0;
  double B0 = 10.0;
  double b = 1.0;  // field gradient
  /// Optional custom field B(r) and its Jacobian dB_i/dr_j; both or neither.
  std::function<Eigen::Vector3d(const RVector&)> field;
  std::function<Eigen::Matrix3d(const RVector&)> field_jacobian;

  Eigen::Vector3d r0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d v0 = Eigen::Vector3d(0.0, 1.0, 0.0);
  Complex c_plus = 1.0;
  Complex c_minus = 0.0;
  double duration = 1.0;
  double dt = 1e-3;
  std::size_t sample_every = 1;

  std::size_t atoms = 0;  // sampled mode when > 0
  std::uint64_t seed = 0;

  Eigen::Vector3d B(const RVector& r) const;
  Eigen::Matrix3d jacobian(const RVector& r) const;
  /// Throws ValidationError on non-normalized amplitudes, a vanishing field
  /// at r0, or non-positive mass / dt / duration.
  void validate(const ToleranceProfile& tol = default_tolerances()) const;
  /// Ascending eigenvalue index of the |+> state (W_+ = -hbar gamma |B| / 2).
  Eigen::Index plus_index() const { return gamma > 0.0 ? 0 : 1; }
  std::size_t steps() const;
};

/// -hbar gamma S.B(r) with S = sigma / 2.
HermitianOperator sg_hamiltonian(const SternGerlachConfig& cfg, const RVector& r);
/// The spin Hamiltonian as a family over r = (x, y, z) with analytic gradient.
HamiltonianFamily sg_family(const SternGerlachConfig& cfg);

struct SternGerlachBranch {
  Trajectory trajectory;
  double energy_residual = 0.0;  // max |dKE + dW| / scale along the branch
};

struct SternGerlachResult {
  std::optional<SternGerlachBranch> plus;
  std::optional<SternGerlachBranch> minus;
  double weight_plus = 0.0;
  double weight_minus = 0.0;
  std::optional<double> final_separation;  // |r_+(T) - r_-(T)| when both branches exist
  // Sampled mode: atom counts per branch landing at the branch endpoints.
  std::size_t count_plus = 0;
  std::size_t count_minus = 0;
};

SternGerlachResult sg_run(const SternGerlachConfig& cfg,
                          const ToleranceProfile& tol = default_tolerances());

/// Self-consistent mean-force run of the same configuration (no branching).
Trajectory sg_run_mean_force(const SternGerlachConfig& cfg,
                             const ToleranceProfile& tol = default_tolerances());

}  // namespace adiaframe
