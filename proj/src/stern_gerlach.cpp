#include "adiaframe/stern_gerlach.hpp"

#include <cmath>
#include <sstream>

namespace adiaframe {

Eigen::Vector3d SternGerlachConfig::B(const RVector& r) const {
  if (field) return field(r);
  return {-b * r(0), 0.0, B0 + b * r(2)};
}

Eigen::Matrix3d SternGerlachConfig::jacobian(const RVector& r) const {
  if (field_jacobian) return field_jacobian(r);
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(0, 0) = -b;
  j(2, 2) = b;
  return j;
}

std::size_t SternGerlachConfig::steps() const {
  return static_cast<std::size_t>(std::max(1.0, std::round(duration / dt)));
}

void SternGerlachConfig::validate(const ToleranceProfile& tol) const {
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(duration > 0.0)) throw ValidationError("duration must be positive");
  if (gamma == 0.0) throw ValidationError("gamma must be nonzero");
  if (static_cast<bool>(field) != static_cast<bool>(field_jacobian))
    throw ValidationError("custom field needs both B(r) and its Jacobian");
  const double norm2 = std::norm(c_plus) + std::norm(c_minus);
  if (std::abs(norm2 - 1.0) > tol.trace) {
    std::ostringstream os;
    os << "|C+|^2 + |C-|^2 = " << norm2 << ", expected 1";
    throw ValidationError(os.str());
  }
  if (!(B(r0).norm() > 0.0)) throw ValidationError("field vanishes at the initial position");
}

namespace {

CMatrix spin_dot(const Eigen::Vector3d& v) {
  return v(0) * pauli::x() + v(1) * pauli::y() + v(2) * pauli::z();
}

}  // namespace

HermitianOperator sg_hamiltonian(const SternGerlachConfig& cfg, const RVector& r) {
  return HermitianOperator(CMatrix(-0.5 * cfg.hbar * cfg.gamma * spin_dot(cfg.B(r))));
}

HamiltonianFamily sg_family(const SternGerlachConfig& cfg) {
  auto evaluate = [cfg](const RVector& r) {
    return CMatrix(-0.5 * cfg.hbar * cfg.gamma * spin_dot(cfg.B(r)));
  };
  auto gradient = [cfg](const RVector& r) {
    const Eigen::Matrix3d j = cfg.jacobian(r);
    std::vector<CMatrix> g;
    for (int k = 0; k < 3; ++k) g.push_back(-0.5 * cfg.hbar * cfg.gamma * spin_dot(j.col(k)));
    return g;
  };
  return HamiltonianFamily(3, 2, evaluate, gradient, cfg.hbar);
}

namespace {

BranchingScenario branching_scenario(const SternGerlachConfig& cfg) {
  BranchingScenario sc;
  sc.family = sg_family(cfg);
  sc.apparatus = ApparatusModel::flat(RVector::Constant(3, cfg.mass));
  sc.initial = {cfg.r0, cfg.v0};
  sc.amplitudes = CVector::Zero(2);
  sc.amplitudes(cfg.plus_index()) = cfg.c_plus;
  sc.amplitudes(1 - cfg.plus_index()) = cfg.c_minus;
  sc.control = {cfg.duration / static_cast<double>(cfg.steps()), cfg.steps(), cfg.sample_every};
  return sc;
}

double branch_energy_residual(const Trajectory& t, double floor) {
  const auto& s0 = t.initial();
  double worst = 0.0;
  for (const auto& s : t.samples) {
    const double dke = s.kinetic_energy - s0.kinetic_energy;
    const double dw = s.ledger.E_mean - s0.ledger.E_mean;
    const double scale = std::max({std::abs(dke), std::abs(dw), floor});
    worst = std::max(worst, std::abs(dke + dw) / scale);
  }
  return worst;
}

}  // namespace

SternGerlachResult sg_run(const SternGerlachConfig& cfg, const ToleranceProfile& tol) {
  cfg.validate(tol);
  const BranchingScenario sc = branching_scenario(cfg);
  const auto trajectories = run_branching(sc, tol);

  SternGerlachResult out;
  out.weight_plus = std::norm(cfg.c_plus);
  out.weight_minus = std::norm(cfg.c_minus);
  // Energy floor: the kinetic scale of the incoming beam.
  const double floor = std::max(1e-12, 1e-9 * sc.apparatus.kinetic_energy(cfg.r0, cfg.v0));
  for (const auto& t : trajectories) {
    SternGerlachBranch br{t, branch_energy_residual(t, floor)};
    if (*t.branch_label == cfg.plus_index()) {
      out.plus = std::move(br);
    } else {
      out.minus = std::move(br);
    }
  }
  if (out.plus && out.minus) {
    out.final_separation =
        (out.plus->trajectory.final().x - out.minus->trajectory.final().x).norm();
  }
  if (cfg.atoms > 0) {
    RVector w(2);
    w << out.weight_plus, out.weight_minus;
    const auto counts = sample_branches(w, cfg.atoms, cfg.seed);
    out.count_plus = counts[0];
    out.count_minus = counts[1];
  }
  return out;
}

Trajectory sg_run_mean_force(const SternGerlachConfig& cfg, const ToleranceProfile& tol) {
  cfg.validate(tol);
  const BranchingScenario b = branching_scenario(cfg);
  MeanForceScenario sc;
  sc.family = b.family;
  sc.apparatus = b.apparatus;
  sc.initial = b.initial;
  sc.rho0 = b.amplitudes * b.amplitudes.adjoint();
  sc.control = b.control;
  return run_mean_force(sc, tol);
}

}  // namespace adiaframe
