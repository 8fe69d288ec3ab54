#pragma once

#include <vector>

#include "adiaframe/adiabatic_frame.hpp"
#include "adiaframe/dynamics.hpp"
#include "adiaframe/quantum_state.hpp"

namespace adiaframe {

// Microcanonical quantities on a finite spectrum. Sharp counting is exact;
// everything differentiated goes through the Gaussian-broadened versions
// with width sigma. k_B = 1 unless passed explicitly.

/// Number of levels <= E.
double counting_function(const RVector& levels, double E);
/// sum_j Phi((E - W_j) / sigma), Phi the standard normal CDF.
double smoothed_counting(const RVector& levels, double E, double sigma);
/// sum_j of normalized Gaussians of width sigma centred on the levels.
double smoothed_density(const RVector& levels, double E, double sigma);
/// (W_max - W_min) / (m - 1).
double mean_level_spacing(const RVector& levels);

struct ThermoCurve {
  RVector E_grid;
  RVector Omega;
  RVector S;
  RVector T;
  RVector G;
  RVector identity_residual;  // |Omega / (k_B T G) - 1|
  double smoothing_width = 0.0;
  double k_B = 1.0;
};

/// S = k_B ln Omega, 1/T = dS/dE by centered difference of the smoothed
/// entropy, G by smoothed-delta sum. Throws DomainError where Omega = 0.
ThermoCurve entropy_temperature(const RVector& levels, const RVector& E_grid, double sigma,
                                double k_B = 1.0);

/// -sum_j delta(E - W_j) dW_j/dx^k / sum_j delta(E - W_j), Gaussian deltas,
/// level slopes from Hellmann-Feynman.
RVector microcanonical_force(const HamiltonianFamily& fam, const RVector& x, double E,
                             double sigma);

struct MaxwellRow {
  double E = 0.0;
  RVector force;          // direct weighted mean
  RVector T_dS_dx;        // T (dS/dx^k)_E, finite differences in x and E
  RVector minus_dE_dx_S;  // -(dE/dx^k)_S, isentropic finite difference
  double temperature = 0.0;
  double identity_residual = 0.0;  // |Omega / (k_B T G) - 1|
};

struct MaxwellReport {
  std::vector<MaxwellRow> rows;
  double max_deviation_entropy_form = 0.0;     // |F - T dS/dx| / |F|
  double max_deviation_isentropic_form = 0.0;  // |F + dE/dx|_S| / |F|
  double max_identity_residual = 0.0;
};

/// Tabulates both sides of the microcanonical force identities over the
/// requested energies. `dx` is the coordinate finite-difference step.
MaxwellReport maxwell_check(const HamiltonianFamily& fam, const RVector& x,
                            const RVector& energies, double sigma, double dx = 1e-4);

/// exp(-beta W) / Z, diagonal in the adiabatic basis.
QuantumState canonical_state(const RVector& levels, double beta);

struct FrictionTensor {
  RMatrix gamma;
  double beta = 0.0;
  double eta = 0.0;
  double max_imaginary = 0.0;  // largest |Im Gamma_kj| dropped from the Hermitian sum
};

/// Nyquist-Kubo friction from the spectral sum over adiabatic levels with
/// exp(-eta t) regularization of the time integral.
FrictionTensor kubo_friction(const AdiabaticFrame& frame, double beta, double eta);
FrictionTensor kubo_friction(const HamiltonianFamily& fam, const RVector& x, double beta,
                             double eta);

/// 0.1 * mean level spacing / hbar.
double default_kubo_eta(const RVector& levels, double hbar = 1.0);

/// Friction channel for the dynamics module, evaluated by kubo_friction at each x.
FrictionSpec kubo_friction_spec(const HamiltonianFamily& fam, double beta, double eta);

}  // namespace adiaframe
