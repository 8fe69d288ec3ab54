#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "adiaframe/adiabatic_frame.hpp"
#include "adiaframe/trajectory.hpp"

namespace adiaframe {

/// Classical side of the coupled system: mass metric mu_jk(x) and potential V(x).
struct ApparatusModel {
  std::function<RMatrix(const RVector&)> metric;
  std::function<double(const RVector&)> potential;             // empty: V = 0
  std::function<RVector(const RVector&)> potential_gradient;   // empty: centered differences
  bool constant_metric = false;
  RVector fd_step;  // used for metric and potential derivatives

  /// Constant diagonal metric diag(masses).
  static ApparatusModel flat(const RVector& masses);

  Eigen::Index coordinates() const { return fd_step.size(); }
  /// Throws ValidationError if mu(x) is not symmetric positive definite.
  RMatrix mass_matrix(const RVector& x) const;
  double potential_energy(const RVector& x) const;
  RVector potential_force(const RVector& x) const;  // -grad V
  double kinetic_energy(const RVector& x, const RVector& v) const;
};

struct ApparatusState {
  RVector x;
  RVector v;
};

/// Velocity-linear friction Gamma_kj(x) v^j, applied as -Gamma v.
struct FrictionSpec {
  std::function<RMatrix(const RVector&)> gamma;
  bool enabled = false;

  static FrictionSpec none() { return {}; }
  static FrictionSpec constant(const RMatrix& g);
  RMatrix at(const RVector& x) const;
};

/// Prescribed apparatus motion x(t), v(t) = dx/dt.
struct DrivenPath {
  std::function<RVector(double)> position;
  std::function<RVector(double)> velocity;

  static DrivenPath linear(const RVector& x0, const RVector& v);
};

// ---------------------------------------------------------------------------
// Quantum propagation in the moving adiabatic frame.

/// -(i/hbar) [H(x, v), rho]
CMatrix liouvillian(const AdiabaticFrame& frame, const RVector& v, const CMatrix& rho);

struct QuantumStepResult {
  CMatrix rho;
  AdiabaticFrame mid;
  AdiabaticFrame end;
};

/// One RK4 step of i hbar drho/dt = [H(x, v), rho] along a known path segment.
/// Frames at the stage points are continuity-referenced to `start`.
QuantumStepResult quantum_step(const HamiltonianFamily& fam, const AdiabaticFrame& start,
                               const RVector& v_start, const CMatrix& rho,
                               const RVector& x_mid, const RVector& v_mid,
                               const RVector& x_end, const RVector& v_end, double dt,
                               const ToleranceProfile& tol = default_tolerances());

/// State of the ledger quadrature at one time point of a step.
struct LedgerPoint {
  const AdiabaticFrame* frame = nullptr;
  const CMatrix* rho = nullptr;
  RVector v;
};

/// Adds the heat and work of one step. The power -Tr(rho F_k) v^k (work) and
/// -Tr(rho f_k) v^k (heat) is integrated by Simpson's rule over
/// begin/mid/end; E_mean is Tr(rho W) at `end`.
EnergyLedger accumulate_ledger(EnergyLedger ledger, const LedgerPoint& begin,
                               const LedgerPoint& mid, const LedgerPoint& end, double dt);

/// Mean heat and work powers at one point (power_heat, power_work).
std::pair<double, double> ledger_powers(const AdiabaticFrame& frame, const CMatrix& rho,
                                        const RVector& v);

// ---------------------------------------------------------------------------
// Runs.

struct StepControl {
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t sample_every = 1;
};

struct DrivenScenario {
  HamiltonianFamily family;
  DrivenPath path;
  CMatrix rho0;  // adiabatic basis at path.position(0)
  StepControl control;
  std::vector<std::size_t> projection_steps;  // pinch rho after these step indices (1-based)
  bool project_every_step = false;
  /// Called at t = 0 and after every step with the current frame and state.
  std::function<void(double, const AdiabaticFrame&, const CMatrix&)> observer;
};

/// Quantum state carried along a prescribed apparatus path with the full
/// heat/work ledger.
Trajectory run_driven(const DrivenScenario& scenario,
                      const ToleranceProfile& tol = default_tolerances());

/// One velocity-Verlet step (generalized leapfrog with fixed-point corrector
/// for x-dependent metrics) under L_A - W_k(x) with optional friction.
struct BranchStepResult {
  ApparatusState state;
  AdiabaticFrame frame;
  double dissipated = 0.0;  // Gamma v.v dt over the step
};
BranchStepResult classical_step_branch(const ApparatusModel& app, const ApparatusState& state,
                                       const HamiltonianFamily& fam, const AdiabaticFrame& frame,
                                       Eigen::Index level, const FrictionSpec& friction,
                                       double dt, const ToleranceProfile& tol = default_tolerances());

struct BranchingScenario {
  HamiltonianFamily family;
  ApparatusModel apparatus;
  ApparatusState initial;
  CVector amplitudes;  // C_k in the adiabatic basis at initial.x
  FrictionSpec friction;
  StepControl control;
};

/// One trajectory per adiabatic level with nonzero weight |C_k|^2.
std::vector<Trajectory> run_branching(const BranchingScenario& scenario,
                                      const ToleranceProfile& tol = default_tolerances());

/// Branch counts for `draws` measurements drawn from the weights.
std::vector<std::size_t> sample_branches(const RVector& weights, std::size_t draws,
                                         std::uint64_t seed);

/// |C_k|^2, validated to sum to one.
RVector branch_weights(const CVector& amplitudes,
                       const ToleranceProfile& tol = default_tolerances());

struct MeanForceScenario {
  HamiltonianFamily family;
  ApparatusModel apparatus;
  ApparatusState initial;
  CMatrix rho0;  // adiabatic basis at initial.x
  FrictionSpec friction;
  StepControl control;
};

/// Self-consistent run: the apparatus feels Tr(rho (F_k + f_k)) while rho
/// co-evolves. Integrated as one RK4 system in (x, p, rho).
Trajectory run_mean_force(const MeanForceScenario& scenario,
                          const ToleranceProfile& tol = default_tolerances());

/// Fixed geometric path x(lambda), lambda in [0, 1].
struct GeometricPath {
  std::function<RVector(double)> position;
  std::function<RVector(double)> tangent;  // dx/dlambda
};

struct AveragedDiabaticForce {
  RVector mean;      // time average of Tr(rho f_k)
  RVector mean_abs;  // time average of |Tr(rho f_k)|
  double duration = 0.0;
};

/// Traverses `path` in time base_duration / speed_scale with fixed dt and
/// averages the diabatic force. speed_scale = 0 holds the apparatus at
/// path(0) for base_duration.
AveragedDiabaticForce time_averaged_diabatic_force(
    const HamiltonianFamily& fam, const GeometricPath& path, const CMatrix& rho0,
    double base_duration, double speed_scale, double dt, bool project_every_step = false,
    const ToleranceProfile& tol = default_tolerances());

}  // namespace adiaframe
