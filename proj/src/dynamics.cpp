#include "adiaframe/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adiaframe/entropy_audit.hpp"
#include "adiaframe/quantum_state.hpp"
#include "adiaframe/random.hpp"

namespace adiaframe {

// ---------------------------------------------------------------------------
// Ledger and trajectory bookkeeping.

double EnergyLedger::scale(double floor) const {
  return std::max({std::abs(delta_E()), std::abs(Q_cum), std::abs(W_cum), floor});
}

double EnergyLedger::relative_residual(double floor) const {
  return std::abs(residual) / scale(floor);
}

void Trajectory::validate() const {
  if (!(weight >= 0.0 && weight <= 1.0)) throw ValidationError("trajectory weight outside [0, 1]");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].t > samples[i - 1].t))
      throw ValidationError("trajectory timestamps are not strictly increasing");
}

// ---------------------------------------------------------------------------
// Apparatus model.

ApparatusModel ApparatusModel::flat(const RVector& masses) {
  if (masses.size() < 1 || (masses.array() <= 0.0).any())
    throw ValidationError("masses must be positive");
  ApparatusModel m;
  const RMatrix mu = masses.asDiagonal();
  m.metric = [mu](const RVector&) { return mu; };
  m.constant_metric = true;
  m.fd_step = RVector::Constant(masses.size(), 1e-6);
  return m;
}

RMatrix ApparatusModel::mass_matrix(const RVector& x) const {
  if (!metric) throw ValidationError("apparatus model has no metric");
  RMatrix mu = metric(x);
  const Eigen::Index n = coordinates();
  if (mu.rows() != n || mu.cols() != n) throw ValidationError("metric has wrong dimension");
  if ((mu - mu.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, mu.cwiseAbs().maxCoeff()))
    throw ValidationError("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<RMatrix> es(mu, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 0.0)) {
    std::ostringstream os;
    os << "metric is not positive definite (min eigenvalue " << es.eigenvalues()(0) << ")";
    throw ValidationError(os.str());
  }
  return mu;
}

double ApparatusModel::potential_energy(const RVector& x) const {
  return potential ? potential(x) : 0.0;
}

RVector ApparatusModel::potential_force(const RVector& x) const {
  const Eigen::Index n = coordinates();
  if (potential_gradient) return -potential_gradient(x);
  if (!potential) return RVector::Zero(n);
  RVector f(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    RVector xp = x, xm = x;
    xp(k) += fd_step(k);
    xm(k) -= fd_step(k);
    f(k) = -(potential(xp) - potential(xm)) / (2.0 * fd_step(k));
  }
  return f;
}

double ApparatusModel::kinetic_energy(const RVector& x, const RVector& v) const {
  return 0.5 * v.dot(mass_matrix(x) * v);
}

FrictionSpec FrictionSpec::constant(const RMatrix& g) {
  FrictionSpec f;
  f.gamma = [g](const RVector&) { return g; };
  f.enabled = true;
  return f;
}

RMatrix FrictionSpec::at(const RVector& x) const {
  if (!enabled || !gamma) return RMatrix::Zero(x.size(), x.size());
  RMatrix g = gamma(x);
  if (g.rows() != x.size() || g.cols() != x.size())
    throw ValidationError("friction tensor has wrong dimension");
  return g;
}

DrivenPath DrivenPath::linear(const RVector& x0, const RVector& v) {
  DrivenPath p;
  p.position = [x0, v](double t) { return RVector(x0 + t * v); };
  p.velocity = [v](double) { return v; };
  return p;
}

// ---------------------------------------------------------------------------
// Quantum propagation.

CMatrix liouvillian(const AdiabaticFrame& frame, const RVector& v, const CMatrix& rho) {
  const CMatrix h = moving_frame_hamiltonian(frame, v).matrix();
  return (-kI / frame.hbar) * (h * rho - rho * h);
}

QuantumStepResult quantum_step(const HamiltonianFamily& fam, const AdiabaticFrame& start,
                               const RVector& v_start, const CMatrix& rho,
                               const RVector& x_mid, const RVector& v_mid,
                               const RVector& x_end, const RVector& v_end, double dt,
                               const ToleranceProfile& tol) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (rho.rows() != start.dim()) throw ValidationError("state and frame dimensions differ");
  AdiabaticFrame mid = build_frame(fam, x_mid, &start, start.method, tol);
  AdiabaticFrame end = build_frame(fam, x_end, &start, start.method, tol);

  const CMatrix k1 = liouvillian(start, v_start, rho);
  const CMatrix k2 = liouvillian(mid, v_mid, rho + 0.5 * dt * k1);
  const CMatrix k3 = liouvillian(mid, v_mid, rho + 0.5 * dt * k2);
  const CMatrix k4 = liouvillian(end, v_end, rho + dt * k3);
  CMatrix next = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  const double drift = std::abs(next.trace() - rho.trace());
  if (drift > tol.trace_drift_per_step) {
    std::ostringstream os;
    os << "trace drift " << drift << " in one step exceeds " << tol.trace_drift_per_step
       << "; reduce dt (currently " << dt << ")";
    throw StepSizeError(os.str());
  }
  // RK4 shrinks the purity slightly for every stable step; growth means the
  // step is outside the stability region even when the trace survives.
  const double growth = next.squaredNorm() - rho.squaredNorm();
  if (growth > 1e-6) {
    std::ostringstream os;
    os << "purity grew by " << growth << " in one step; reduce dt (currently " << dt << ")";
    throw StepSizeError(os.str());
  }
  next = 0.5 * (next + next.adjoint()).eval();
  return {std::move(next), std::move(mid), std::move(end)};
}

std::pair<double, double> ledger_powers(const AdiabaticFrame& frame, const CMatrix& rho,
                                        const RVector& v) {
  const ForcePair fp = forces(frame);
  double heat = 0.0;
  double work = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) == 0.0) continue;
    const auto kk = static_cast<std::size_t>(k);
    const double mean_adiabatic = rho.diagonal().real().dot(fp.adiabatic[kk]);
    Complex mean_diabatic = 0.0;
    const CMatrix& f = fp.diabatic[kk];
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      for (Eigen::Index j = 0; j < rho.cols(); ++j) mean_diabatic += rho(i, j) * f(j, i);
    work -= mean_adiabatic * v(k);
    heat -= mean_diabatic.real() * v(k);
  }
  return {heat, work};
}

EnergyLedger accumulate_ledger(EnergyLedger ledger, const LedgerPoint& begin,
                               const LedgerPoint& mid, const LedgerPoint& end, double dt) {
  const auto [q0, w0] = ledger_powers(*begin.frame, *begin.rho, begin.v);
  const auto [qm, wm] = ledger_powers(*mid.frame, *mid.rho, mid.v);
  const auto [q1, w1] = ledger_powers(*end.frame, *end.rho, end.v);
  ledger.Q_cum += dt / 6.0 * (q0 + 4.0 * qm + q1);
  ledger.W_cum += dt / 6.0 * (w0 + 4.0 * wm + w1);
  ledger.E_mean = end.rho->diagonal().real().dot(end.frame->energies());
  ledger.residual = ledger.E_mean - ledger.E_initial - ledger.Q_cum - ledger.W_cum;
  return ledger;
}

namespace {

double mean_energy(const AdiabaticFrame& frame, const CMatrix& rho) {
  return rho.diagonal().real().dot(frame.energies());
}

bool sample_due(std::size_t step, const StepControl& c) {
  return step == c.steps || (c.sample_every > 0 && step % c.sample_every == 0);
}

void check_control(const StepControl& c) {
  if (!(c.dt > 0.0)) throw ValidationError("dt must be positive");
  if (c.steps == 0) throw ValidationError("steps must be positive");
}

}  // namespace

Trajectory run_driven(const DrivenScenario& sc, const ToleranceProfile& tol) {
  check_control(sc.control);
  if (!sc.path.position || !sc.path.velocity) throw ValidationError("driven path is incomplete");
  validate_density_matrix(sc.rho0, tol);
  const double dt = sc.control.dt;
  const auto& fam = sc.family;

  RVector x = sc.path.position(0.0);
  RVector v = sc.path.velocity(0.0);
  AdiabaticFrame frame = build_frame(fam, x, nullptr, ConnectionMethod::Perturbative, tol);
  CMatrix rho = 0.5 * (sc.rho0 + sc.rho0.adjoint());
  EnergyLedger ledger = EnergyLedger::start(mean_energy(frame, rho));

  Trajectory traj;
  auto record = [&](double t) {
    traj.samples.push_back({t, x, v, rho, ledger, von_neumann_entropy(rho, 1.0, tol), 0.0, 0.0});
  };
  record(0.0);
  if (sc.observer) sc.observer(0.0, frame, rho);

  std::vector<std::size_t> projections = sc.projection_steps;
  std::sort(projections.begin(), projections.end());
  const Projector pinch = Projector::adiabatic(fam.dim());

  CMatrix d0 = liouvillian(frame, v, rho);
  for (std::size_t step = 1; step <= sc.control.steps; ++step) {
    const double t0 = static_cast<double>(step - 1) * dt;
    const double tm = t0 + 0.5 * dt;
    const double t1 = static_cast<double>(step) * dt;
    const RVector xm = sc.path.position(tm), vm = sc.path.velocity(tm);
    const RVector x1 = sc.path.position(t1), v1 = sc.path.velocity(t1);

    QuantumStepResult qs = quantum_step(fam, frame, v, rho, xm, vm, x1, v1, dt, tol);
    const CMatrix d1 = liouvillian(qs.end, v1, qs.rho);
    // Cubic Hermite midpoint: fourth-order accurate, keeps Simpson at RK4 order.
    const CMatrix rho_m = 0.5 * (rho + qs.rho) + (dt / 8.0) * (d0 - d1);
    ledger = accumulate_ledger(ledger, {&frame, &rho, v}, {&qs.mid, &rho_m, vm},
                               {&qs.end, &qs.rho, v1}, dt);

    rho = std::move(qs.rho);
    frame = std::move(qs.end);
    x = x1;
    v = v1;
    d0 = d1;

    if (sc.project_every_step || std::binary_search(projections.begin(), projections.end(), step)) {
      ProjectionEvent ev;
      ev.t = t1;
      ev.entropy_before = von_neumann_entropy(rho, 1.0, tol);
      rho = project(rho, pinch);
      ev.entropy_after = von_neumann_entropy(rho, 1.0, tol);
      traj.projections.push_back(ev);
      d0 = liouvillian(frame, v, rho);
    }

    if (sc.observer) sc.observer(t1, frame, rho);
    if (sample_due(step, sc.control)) record(t1);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Classical branch dynamics.

namespace {

// Generalized force conjugate to x: 1/2 v.dmu_k.v - dV/dx^k - dW_level/dx^k - (Gamma v)_k.
RVector branch_force(const ApparatusModel& app, const RVector& x, const AdiabaticFrame& frame,
                     Eigen::Index level, const RMatrix& gamma, const RVector& v) {
  RVector f = app.potential_force(x);
  for (Eigen::Index k = 0; k < f.size(); ++k)
    f(k) -= frame.force_gradient[static_cast<std::size_t>(k)](level, level).real();
  if (!app.constant_metric) {
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      RVector xp = x, xm = x;
      xp(k) += app.fd_step(k);
      xm(k) -= app.fd_step(k);
      const RMatrix dmu = (app.metric(xp) - app.metric(xm)) / (2.0 * app.fd_step(k));
      f(k) += 0.5 * v.dot(dmu * v);
    }
  }
  f -= gamma * v;
  return f;
}

bool converged(const RVector& delta, const RVector& value, const ToleranceProfile& tol) {
  return delta.norm() <= tol.corrector * (1.0 + value.norm());
}

}  // namespace

BranchStepResult classical_step_branch(const ApparatusModel& app, const ApparatusState& state,
                                       const HamiltonianFamily& fam, const AdiabaticFrame& frame,
                                       Eigen::Index level, const FrictionSpec& friction,
                                       double dt, const ToleranceProfile& tol) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (level < 0 || level >= frame.dim()) throw ValidationError("branch level out of range");
  const RVector& x0 = state.x;
  const RMatrix mu0 = app.mass_matrix(x0);
  const Eigen::LLT<RMatrix> inv0(mu0);
  const RMatrix gamma0 = friction.at(x0);
  const RVector p0 = mu0 * state.v;

  // Half kick (implicit in p when the force depends on velocity).
  RVector p_half = p0 + 0.5 * dt * branch_force(app, x0, frame, level, gamma0, state.v);
  const bool velocity_dependent = friction.enabled || !app.constant_metric;
  if (velocity_dependent) {
    int it = 0;
    for (;; ++it) {
      if (it >= tol.corrector_max_iterations)
        throw StepSizeError("momentum corrector did not converge; reduce dt");
      const RVector next =
          p0 + 0.5 * dt * branch_force(app, x0, frame, level, gamma0, inv0.solve(p_half));
      const RVector delta = next - p_half;
      p_half = next;
      if (converged(delta, p_half, tol)) break;
    }
  }

  // Drift (implicit in x for position-dependent metrics).
  const RVector v_half0 = inv0.solve(p_half);
  RVector x1 = x0 + dt * v_half0;
  if (!app.constant_metric) {
    int it = 0;
    for (;; ++it) {
      if (it >= tol.corrector_max_iterations)
        throw StepSizeError("position corrector did not converge; reduce dt");
      const RVector next =
          x0 + 0.5 * dt * (v_half0 + app.mass_matrix(x1).llt().solve(p_half));
      const RVector delta = next - x1;
      x1 = next;
      if (converged(delta, x1, tol)) break;
    }
  }

  AdiabaticFrame frame1 = build_frame(fam, x1, &frame, frame.method, tol);
  const RMatrix mu1 = app.mass_matrix(x1);
  const Eigen::LLT<RMatrix> inv1(mu1);
  const RMatrix gamma1 = friction.at(x1);
  const RVector v_half1 = inv1.solve(p_half);
  const RVector p1 = p_half + 0.5 * dt * branch_force(app, x1, frame1, level, gamma1, v_half1);

  BranchStepResult out;
  out.state.x = x1;
  out.state.v = inv1.solve(p1);
  out.dissipated = 0.5 * dt * (v_half0.dot(gamma0 * v_half0) + v_half1.dot(gamma1 * v_half1));
  out.frame = std::move(frame1);
  return out;
}

RVector branch_weights(const CVector& amplitudes, const ToleranceProfile& tol) {
  if (amplitudes.size() < 1) throw ValidationError("no amplitudes given");
  RVector w = amplitudes.cwiseAbs2();
  if (std::abs(w.sum() - 1.0) > tol.trace) {
    std::ostringstream os;
    os << "branch weights sum to " << w.sum() << ", not 1";
    throw ValidationError(os.str());
  }
  return w;
}

std::vector<Trajectory> run_branching(const BranchingScenario& sc, const ToleranceProfile& tol) {
  check_control(sc.control);
  const auto& fam = sc.family;
  if (sc.amplitudes.size() != fam.dim())
    throw ValidationError("amplitude vector does not match object dimension");
  if (sc.initial.x.size() != fam.coordinates() || sc.initial.v.size() != fam.coordinates())
    throw ValidationError("initial apparatus state does not match coordinate count");
  const RVector weights = branch_weights(sc.amplitudes, tol);
  const AdiabaticFrame frame0 =
      build_frame(fam, sc.initial.x, nullptr, ConnectionMethod::Perturbative, tol);
  const double dt = sc.control.dt;

  std::vector<Trajectory> out;
  for (Eigen::Index level = 0; level < fam.dim(); ++level) {
    if (weights(level) == 0.0) continue;
    Trajectory traj;
    traj.branch_label = level;
    traj.weight = weights(level);

    CMatrix rho = CMatrix::Zero(fam.dim(), fam.dim());
    rho(level, level) = 1.0;
    ApparatusState st = sc.initial;
    AdiabaticFrame frame = frame0;
    EnergyLedger ledger = EnergyLedger::start(frame.energies()(level));
    auto record = [&](double t) {
      traj.samples.push_back({t, st.x, st.v, rho, ledger, 0.0,
                              sc.apparatus.kinetic_energy(st.x, st.v),
                              sc.apparatus.potential_energy(st.x)});
    };
    auto level_gradient = [&](const AdiabaticFrame& f) {
      RVector g(f.coordinates());
      for (Eigen::Index k = 0; k < g.size(); ++k)
        g(k) = f.force_gradient[static_cast<std::size_t>(k)](level, level).real();
      return g;
    };
    record(0.0);

    for (std::size_t step = 1; step <= sc.control.steps; ++step) {
      BranchStepResult r = classical_step_branch(sc.apparatus, st, fam, frame, level,
                                                 sc.friction, dt, tol);
      // Trapezoidal work along the step; the branch is purely adiabatic.
      ledger.W_cum += 0.5 * (level_gradient(frame) + level_gradient(r.frame)).dot(r.state.x - st.x);
      ledger.E_mean = r.frame.energies()(level);
      ledger.residual = ledger.E_mean - ledger.E_initial - ledger.Q_cum - ledger.W_cum;
      traj.dissipated += r.dissipated;
      st = std::move(r.state);
      frame = std::move(r.frame);
      if (sample_due(step, sc.control)) record(static_cast<double>(step) * dt);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<std::size_t> sample_branches(const RVector& weights, std::size_t draws,
                                         std::uint64_t seed) {
  if ((weights.array() < 0.0).any() || !(weights.sum() > 0.0))
    throw ValidationError("branch weights must be non-negative with positive sum");
  Rng rng(seed);
  std::vector<std::size_t> counts(static_cast<std::size_t>(weights.size()), 0);
  for (std::size_t i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(rng.categorical(weights))];
  return counts;
}

// ---------------------------------------------------------------------------
// Mean-force dynamics.

namespace {

struct CoupledState {
  RVector x;
  RVector p;
  CMatrix rho;

  CoupledState axpy(double a, const CoupledState& d) const {
    return {x + a * d.x, p + a * d.p, rho + a * d.rho};
  }
};

struct CoupledRhs {
  const HamiltonianFamily& fam;
  const ApparatusModel& app;
  const FrictionSpec& friction;
  const ToleranceProfile& tol;

  RVector velocity(const CoupledState& s) const { return app.mass_matrix(s.x).llt().solve(s.p); }

  // Mean force on the apparatus: Tr(rho (F_k + f_k)) - dV/dx^k + metric term - (Gamma v)_k.
  CoupledState operator()(const CoupledState& s, const AdiabaticFrame& frame) const {
    const RVector v = velocity(s);
    const ForcePair fp = forces(frame);
    RVector force = app.potential_force(s.x);
    for (Eigen::Index k = 0; k < force.size(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      force(k) += expectation(s.rho, fp.adiabatic_operator(kk) + fp.diabatic[kk], tol);
    }
    if (!app.constant_metric) {
      for (Eigen::Index k = 0; k < force.size(); ++k) {
        RVector xp = s.x, xm = s.x;
        xp(k) += app.fd_step(k);
        xm(k) -= app.fd_step(k);
        force(k) += 0.5 * v.dot((app.metric(xp) - app.metric(xm)) / (2.0 * app.fd_step(k)) * v);
      }
    }
    force -= friction.at(s.x) * v;
    return {v, force, liouvillian(frame, v, s.rho)};
  }
};

}  // namespace

Trajectory run_mean_force(const MeanForceScenario& sc, const ToleranceProfile& tol) {
  check_control(sc.control);
  const auto& fam = sc.family;
  if (sc.initial.x.size() != fam.coordinates() || sc.initial.v.size() != fam.coordinates())
    throw ValidationError("initial apparatus state does not match coordinate count");
  if (sc.rho0.rows() != fam.dim()) throw ValidationError("initial state does not match object dimension");
  validate_density_matrix(sc.rho0, tol);
  const double dt = sc.control.dt;
  const CoupledRhs rhs{fam, sc.apparatus, sc.friction, tol};

  CoupledState y{sc.initial.x, sc.apparatus.mass_matrix(sc.initial.x) * sc.initial.v,
                 0.5 * (sc.rho0 + sc.rho0.adjoint())};
  AdiabaticFrame frame = build_frame(fam, y.x, nullptr, ConnectionMethod::Perturbative, tol);
  EnergyLedger ledger = EnergyLedger::start(mean_energy(frame, y.rho));

  Trajectory traj;
  auto record = [&](double t, const RVector& v) {
    traj.samples.push_back({t, y.x, v, y.rho, ledger, von_neumann_entropy(y.rho, 1.0, tol),
                            sc.apparatus.kinetic_energy(y.x, v),
                            sc.apparatus.potential_energy(y.x)});
  };
  RVector v = rhs.velocity(y);
  record(0.0, v);

  auto rayleigh = [&](const RVector& x, const RVector& vel) {
    return sc.friction.enabled ? vel.dot(sc.friction.at(x) * vel) : 0.0;
  };

  CoupledState k1 = rhs(y, frame);
  for (std::size_t step = 1; step <= sc.control.steps; ++step) {
    const CoupledState y2 = y.axpy(0.5 * dt, k1);
    const AdiabaticFrame f2 = build_frame(fam, y2.x, &frame, frame.method, tol);
    const CoupledState k2 = rhs(y2, f2);
    const CoupledState y3 = y.axpy(0.5 * dt, k2);
    const AdiabaticFrame f3 = build_frame(fam, y3.x, &frame, frame.method, tol);
    const CoupledState k3 = rhs(y3, f3);
    const CoupledState y4 = y.axpy(dt, k3);
    const AdiabaticFrame f4 = build_frame(fam, y4.x, &frame, frame.method, tol);
    const CoupledState k4 = rhs(y4, f4);

    CoupledState y1{y.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                    y.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
                    y.rho + dt / 6.0 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho)};
    const double drift = std::abs(y1.rho.trace() - y.rho.trace());
    if (drift > tol.trace_drift_per_step) {
      std::ostringstream os;
      os << "trace drift " << drift << " in one step; reduce dt (currently " << dt << ")";
      throw StepSizeError(os.str());
    }
    y1.rho = 0.5 * (y1.rho + y1.rho.adjoint()).eval();
    AdiabaticFrame frame1 = build_frame(fam, y1.x, &frame, frame.method, tol);
    const CoupledState d1 = rhs(y1, frame1);

    // Hermite midpoint for the Simpson ledger.
    const CoupledState ym{0.5 * (y.x + y1.x) + dt / 8.0 * (k1.x - d1.x),
                          0.5 * (y.p + y1.p) + dt / 8.0 * (k1.p - d1.p),
                          0.5 * (y.rho + y1.rho) + dt / 8.0 * (k1.rho - d1.rho)};
    const AdiabaticFrame fm = build_frame(fam, ym.x, &frame, frame.method, tol);
    const RVector v0 = k1.x, vm = rhs.velocity(ym), v1 = d1.x;
    ledger = accumulate_ledger(ledger, {&frame, &y.rho, v0}, {&fm, &ym.rho, vm},
                               {&frame1, &y1.rho, v1}, dt);
    traj.dissipated +=
        dt / 6.0 * (rayleigh(y.x, v0) + 4.0 * rayleigh(ym.x, vm) + rayleigh(y1.x, v1));

    y = std::move(y1);
    frame = std::move(frame1);
    k1 = d1;
    if (sample_due(step, sc.control)) record(static_cast<double>(step) * dt, v1);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Oscillation averaging.

AveragedDiabaticForce time_averaged_diabatic_force(const HamiltonianFamily& fam,
                                                   const GeometricPath& path, const CMatrix& rho0,
                                                   double base_duration, double speed_scale,
                                                   double dt, bool project_every_step,
                                                   const ToleranceProfile& tol) {
  if (!(base_duration > 0.0) || !(dt > 0.0)) throw ValidationError("duration and dt must be positive");
  if (speed_scale < 0.0) throw ValidationError("speed scale must be non-negative");

  DrivenScenario sc;
  sc.family = fam;
  sc.rho0 = rho0;
  sc.project_every_step = project_every_step;
  double duration = base_duration;
  if (speed_scale == 0.0) {
    const RVector x0 = path.position(0.0);
    sc.path = DrivenPath::linear(x0, RVector::Zero(x0.size()));
  } else {
    duration = base_duration / speed_scale;
    sc.path.position = [path, duration](double t) { return path.position(t / duration); };
    sc.path.velocity = [path, duration](double t) {
      return RVector(path.tangent(t / duration) / duration);
    };
  }
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(duration / dt)));
  sc.control = {duration / static_cast<double>(steps), steps, steps};

  const Eigen::Index n = fam.coordinates();
  std::vector<double> times;
  std::vector<RVector> values;
  sc.observer = [&](double t, const AdiabaticFrame& frame, const CMatrix& rho) {
    const ForcePair fp = forces(frame);
    RVector tr(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const CMatrix& f = fp.diabatic[static_cast<std::size_t>(k)];
      Complex acc = 0.0;
      for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j) acc += rho(i, j) * f(j, i);
      tr(k) = acc.real();
    }
    times.push_back(t);
    values.push_back(tr);
  };
  run_driven(sc, tol);

  AveragedDiabaticForce out;
  out.duration = duration;
  out.mean = RVector::Zero(n);
  out.mean_abs = RVector::Zero(n);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double h = times[i] - times[i - 1];
    out.mean += 0.5 * h * (values[i] + values[i - 1]);
    out.mean_abs += 0.5 * h * (values[i].cwiseAbs() + values[i - 1].cwiseAbs());
  }
  out.mean /= duration;
  out.mean_abs /= duration;
  return out;
}

}  // namespace adiaframe
