#include "adiaframe/thermo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace adiaframe {

double counting_function(const RVector& levels, double E) {
  return static_cast<double>((levels.array() <= E).count());
}

double smoothed_counting(const RVector& levels, double E, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("smoothing width must be positive");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < levels.size(); ++j)
    acc += 0.5 * std::erfc(-(E - levels(j)) / (std::numbers::sqrt2 * sigma));
  return acc;
}

double smoothed_density(const RVector& levels, double E, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("smoothing width must be positive");
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (Eigen::Index j = 0; j < levels.size(); ++j) {
    const double u = (E - levels(j)) / sigma;
    acc += std::exp(-0.5 * u * u);
  }
  return norm * acc;
}

double mean_level_spacing(const RVector& levels) {
  if (levels.size() < 2) throw DomainError("level spacing needs at least two levels");
  return (levels.maxCoeff() - levels.minCoeff()) / static_cast<double>(levels.size() - 1);
}

namespace {

double entropy_at(const RVector& levels, double E, double sigma, double k_B) {
  const double omega = smoothed_counting(levels, E, sigma);
  if (!(omega > 0.0)) {
    std::ostringstream os;
    os << "entropy undefined: Omega(" << E << ") = 0";
    throw DomainError(os.str());
  }
  return k_B * std::log(omega);
}

// 1/T = dS/dE, centered difference with step 1e-3 sigma.
double temperature_at(const RVector& levels, double E, double sigma, double k_B) {
  const double h = 1e-3 * sigma;
  const double dS = entropy_at(levels, E + h, sigma, k_B) - entropy_at(levels, E - h, sigma, k_B);
  return 2.0 * h / dS;
}

RVector sorted_levels(const HamiltonianFamily& fam, const RVector& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(fam.hamiltonian(x).matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues();
}

}  // namespace

ThermoCurve entropy_temperature(const RVector& levels, const RVector& E_grid, double sigma,
                                double k_B) {
  ThermoCurve c;
  c.E_grid = E_grid;
  c.smoothing_width = sigma;
  c.k_B = k_B;
  const Eigen::Index n = E_grid.size();
  c.Omega.resize(n);
  c.S.resize(n);
  c.T.resize(n);
  c.G.resize(n);
  c.identity_residual.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double E = E_grid(i);
    c.Omega(i) = smoothed_counting(levels, E, sigma);
    c.S(i) = entropy_at(levels, E, sigma, k_B);
    c.T(i) = temperature_at(levels, E, sigma, k_B);
    c.G(i) = smoothed_density(levels, E, sigma);
    c.identity_residual(i) = std::abs(c.Omega(i) / (k_B * c.T(i) * c.G(i)) - 1.0);
  }
  return c;
}

RVector microcanonical_force(const HamiltonianFamily& fam, const RVector& x, double E,
                             double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("smoothing width must be positive");
  const Spectrum s = hermitian_eig(fam.hamiltonian(x));
  const auto grad = fam.derivative(x);
  const Eigen::Index n = fam.coordinates();
  RVector weighted = RVector::Zero(n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < s.dim(); ++j) {
    const double u = (E - s.eigenvalues(j)) / sigma;
    const double w = std::exp(-0.5 * u * u);
    if (w == 0.0) continue;
    total += w;
    const CVector col = s.basis.col(j);
    for (Eigen::Index k = 0; k < n; ++k)
      weighted(k) += w * col.dot(grad[static_cast<std::size_t>(k)] * col).real();
  }
  if (!(total > 1e-300)) {
    std::ostringstream os;
    os << "no levels within reach of E = " << E << " at width " << sigma;
    throw DomainError(os.str());
  }
  return -weighted / total;
}

MaxwellReport maxwell_check(const HamiltonianFamily& fam, const RVector& x,
                            const RVector& energies, double sigma, double dx) {
  const Eigen::Index n = fam.coordinates();
  const RVector levels = sorted_levels(fam, x);
  std::vector<RVector> plus, minus;
  for (Eigen::Index k = 0; k < n; ++k) {
    RVector xp = x, xm = x;
    xp(k) += dx;
    xm(k) -= dx;
    plus.push_back(sorted_levels(fam, xp));
    minus.push_back(sorted_levels(fam, xm));
  }

  // Energy with S(E', displaced levels) = target, Newton from `guess`.
  auto isentropic_energy = [&](const RVector& lv, double target, double guess) {
    double E = guess;
    for (int it = 0; it < 50; ++it) {
      const double omega = smoothed_counting(lv, E, sigma);
      const double residual = std::log(omega) - target;
      const double slope = smoothed_density(lv, E, sigma) / omega;
      const double step = residual / slope;
      E -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(E))) break;
    }
    return E;
  };

  MaxwellReport report;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    const double E = energies(i);
    MaxwellRow row;
    row.E = E;
    row.force = microcanonical_force(fam, x, E, sigma);
    row.temperature = temperature_at(levels, E, sigma, 1.0);
    row.identity_residual = std::abs(smoothed_counting(levels, E, sigma) /
                                         (row.temperature * smoothed_density(levels, E, sigma)) -
                                     1.0);
    row.T_dS_dx.resize(n);
    row.minus_dE_dx_S.resize(n);
    const double S0 = entropy_at(levels, E, sigma, 1.0);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double dS = entropy_at(plus[kk], E, sigma, 1.0) - entropy_at(minus[kk], E, sigma, 1.0);
      row.T_dS_dx(k) = row.temperature * dS / (2.0 * dx);
      const double Ep = isentropic_energy(plus[kk], S0, E);
      const double Em = isentropic_energy(minus[kk], S0, E);
      row.minus_dE_dx_S(k) = -(Ep - Em) / (2.0 * dx);

      const double scale = std::max(std::abs(row.force(k)), 1e-300);
      report.max_deviation_entropy_form =
          std::max(report.max_deviation_entropy_form, std::abs(row.force(k) - row.T_dS_dx(k)) / scale);
      report.max_deviation_isentropic_form = std::max(
          report.max_deviation_isentropic_form, std::abs(row.force(k) - row.minus_dE_dx_S(k)) / scale);
    }
    report.max_identity_residual = std::max(report.max_identity_residual, row.identity_residual);
    report.rows.push_back(std::move(row));
  }
  return report;
}

QuantumState canonical_state(const RVector& levels, double beta) {
  if (levels.size() < 1) throw ValidationError("canonical state needs at least one level");
  const RVector exponent = -beta * levels;
  const RVector w = (exponent.array() - exponent.maxCoeff()).exp();
  return QuantumState::diagonal(RVector(w / w.sum()));
}

FrictionTensor kubo_friction(const AdiabaticFrame& frame, double beta, double eta) {
  if (!(eta > 0.0)) throw ValidationError("Kubo regularization eta must be positive");
  const RVector& w = frame.energies();
  const double hbar = frame.hbar;
  const Eigen::Index m = frame.dim();
  const Eigen::Index n = frame.coordinates();
  const RVector rho = canonical_state(w, beta).populations();
  const ForcePair fp = forces(frame);

  // c_ab = rho_a (exp(beta hbar w_ab) - 1) / (hbar w_ab) * eta / (eta^2 + w_ab^2), symmetric in a, b.
  RMatrix c = RMatrix::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      if (a == b) continue;
      const double de = w(a) - w(b);
      const double omega = de / hbar;
      double bracket;
      if (std::abs(beta * de) < 1e-8) {
        bracket = rho(a) * beta * (1.0 + 0.5 * beta * de);
      } else {
        bracket = (rho(b) - rho(a)) / de;
      }
      c(a, b) = bracket * eta / (eta * eta + omega * omega);
    }

  FrictionTensor out;
  out.beta = beta;
  out.eta = eta;
  out.gamma = RMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) {
      const CMatrix& fk = fp.diabatic[static_cast<std::size_t>(k)];
      const CMatrix& fj = fp.diabatic[static_cast<std::size_t>(j)];
      Complex acc = 0.0;
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
          if (a != b) acc += c(a, b) * fj(a, b) * fk(b, a);
      out.gamma(k, j) = acc.real();
      out.max_imaginary = std::max(out.max_imaginary, std::abs(acc.imag()));
    }
  return out;
}

FrictionTensor kubo_friction(const HamiltonianFamily& fam, const RVector& x, double beta,
                             double eta) {
  return kubo_friction(build_frame(fam, x), beta, eta);
}

double default_kubo_eta(const RVector& levels, double hbar) {
  return 0.1 * mean_level_spacing(levels) / hbar;
}

FrictionSpec kubo_friction_spec(const HamiltonianFamily& fam, double beta, double eta) {
  FrictionSpec spec;
  spec.enabled = true;
  spec.gamma = [fam, beta, eta](const RVector& x) { return kubo_friction(fam, x, beta, eta).gamma; };
  return spec;
}

}  // namespace adiaframe
