#pragma once

#include <optional>
#include <vector>

#include "adiaframe/core.hpp"

namespace adiaframe {

/// Running first-law decomposition of the mean object energy:
/// E_mean - E_initial = Q_cum + W_cum + residual.
struct EnergyLedger {
  double E_initial = 0.0;
  double E_mean = 0.0;
  double Q_cum = 0.0;  // heat, carried by the diabatic forces
  double W_cum = 0.0;  // work, carried by the adiabatic forces
  double residual = 0.0;

  static EnergyLedger start(double energy) { return {energy, energy, 0.0, 0.0, 0.0}; }
  double delta_E() const { return E_mean - E_initial; }
  /// max(|dE|, |Q|, |W|, floor)
  double scale(double floor) const;
  double relative_residual(double floor) const;
};

struct TrajectorySample {
  double t = 0.0;
  RVector x;
  RVector v;
  CMatrix rho;  // adiabatic basis
  EnergyLedger ledger;
  double entropy = 0.0;           // von Neumann entropy of rho (k_B = 1)
  double kinetic_energy = 0.0;    // 1/2 v^T mu v
  double potential_energy = 0.0;  // apparatus V(x)
};

/// A projective measurement applied during a run.
struct ProjectionEvent {
  double t = 0.0;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  double delta() const { return entropy_after - entropy_before; }
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::optional<Eigen::Index> branch_label;
  double weight = 1.0;
  std::vector<ProjectionEvent> projections;
  double dissipated = 0.0;  // integral of Gamma v.v dt (Rayleigh heating)

  const TrajectorySample& initial() const { return samples.front(); }
  const TrajectorySample& final() const { return samples.back(); }
  /// Throws ValidationError on non-increasing timestamps or weight outside [0, 1].
  void validate() const;
};

}  // namespace adiaframe
