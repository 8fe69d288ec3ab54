#include "adiaframe/entropy_audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "adiaframe/random.hpp"

namespace adiaframe {

double von_neumann_entropy(const CMatrix& rho, double k_B, const ToleranceProfile& tol) {
  if (rho.rows() < 1 || rho.rows() != rho.cols())
    throw ValidationError("entropy of a non-square matrix");
  const CMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("entropy eigensolver failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l < -tol.entropy_negative_eigenvalue) {
      std::ostringstream os;
      os << "not a state: eigenvalue " << l << " is negative";
      throw ValidationError(os.str());
    }
    if (l > 0.0) s -= l * std::log(l);
  }
  return k_B * s;
}

Projector Projector::adiabatic(Eigen::Index m) {
  if (m < 1) throw ValidationError("projector family needs dim >= 1");
  Projector p;
  p.dim_ = m;
  p.standard_ = true;
  for (Eigen::Index k = 0; k < m; ++k) {
    CMatrix op = CMatrix::Zero(m, m);
    op(k, k) = 1.0;
    p.ops_.push_back(std::move(op));
  }
  return p;
}

Projector Projector::rank_one(const CMatrix& basis, const ToleranceProfile& tol) {
  std::vector<CMatrix> ops;
  for (Eigen::Index k = 0; k < basis.cols(); ++k)
    ops.push_back(basis.col(k) * basis.col(k).adjoint());
  return from_operators(std::move(ops), tol);
}

Projector Projector::from_operators(std::vector<CMatrix> ops, const ToleranceProfile& tol) {
  if (ops.empty()) throw ValidationError("projector family is empty");
  const Eigen::Index m = ops.front().rows();
  CMatrix total = CMatrix::Zero(m, m);
  for (std::size_t a = 0; a < ops.size(); ++a) {
    const CMatrix& p = ops[a];
    if (p.rows() != m || p.cols() != m) throw ValidationError("projectors differ in dimension");
    if ((p - p.adjoint()).cwiseAbs().maxCoeff() > tol.projector)
      throw ValidationError("projector is not self-adjoint");
    if ((p * p - p).cwiseAbs().maxCoeff() > tol.projector)
      throw ValidationError("projector is not idempotent");
    for (std::size_t b = a + 1; b < ops.size(); ++b)
      if ((p * ops[b]).cwiseAbs().maxCoeff() > tol.projector)
        throw ValidationError("projectors are not mutually orthogonal");
    total += p;
  }
  if ((total - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > tol.projector)
    throw ValidationError("projector family is incomplete: sum differs from identity");
  Projector out;
  out.dim_ = m;
  out.ops_ = std::move(ops);
  return out;
}

CMatrix project(const CMatrix& rho, const Projector& family) {
  if (rho.rows() != family.dim() || rho.cols() != family.dim())
    throw ValidationError("project: dimension mismatch");
  if (family.is_standard_basis()) {
    return rho.diagonal().asDiagonal();
  }
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& p : family.operators()) out += p * rho * p;
  return 0.5 * (out + out.adjoint());
}

EntropyDelta entropy_delta(const CMatrix& rho, double k_B) {
  EntropyDelta d;
  d.before = von_neumann_entropy(rho, k_B);
  d.after = von_neumann_entropy(project(rho, Projector::adiabatic(rho.rows())), k_B);
  return d;
}

RVector projected_diabatic_force(const AdiabaticFrame& frame, const CMatrix& rho) {
  if (rho.rows() != frame.dim()) throw ValidationError("state and frame dimensions differ");
  const CMatrix rho_p = project(rho, Projector::adiabatic(rho.rows()));
  const ForcePair fp = forces(frame);
  RVector out(frame.coordinates());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const CMatrix& f = fp.diabatic[static_cast<std::size_t>(k)];
    Complex tr = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      for (Eigen::Index j = 0; j < rho.cols(); ++j) tr += rho_p(i, j) * f(j, i);
    out(k) = tr.real();
  }
  return out;
}

UnitaryInvarianceReport unitary_invariance_audit(const Trajectory& run) {
  UnitaryInvarianceReport r;
  if (run.samples.empty()) return r;
  const double s0 = run.samples.front().entropy;
  std::size_t next_event = 0;
  double jumps = 0.0;
  for (const auto& sample : run.samples) {
    while (next_event < run.projections.size() && run.projections[next_event].t <= sample.t) {
      jumps += run.projections[next_event].delta();
      ++next_event;
    }
    r.raw_drift = std::max(r.raw_drift, std::abs(sample.entropy - s0));
    r.unexplained_drift = std::max(r.unexplained_drift, std::abs(sample.entropy - s0 - jumps));
  }
  r.projection_jump = jumps;
  return r;
}

MonotonicitySuite entropy_monotonicity_suite(Eigen::Index dim, std::size_t samples,
                                             std::uint64_t seed, double threshold) {
  Rng rng(seed);
  MonotonicitySuite suite;
  suite.samples = samples;
  suite.min_delta = samples ? std::numeric_limits<double>::infinity() : 0.0;
  suite.draws.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const CMatrix rho = random_density_matrix(dim, rng);
    const EntropyDelta d = entropy_delta(rho);
    suite.min_delta = std::min(suite.min_delta, d.delta());
    if (d.delta() >= -threshold) ++suite.passes;
    suite.draws.push_back(d);
  }
  return suite;
}

}  // namespace adiaframe
