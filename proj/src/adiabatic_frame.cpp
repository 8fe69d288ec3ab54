#include "adiaframe/adiabatic_frame.hpp"

#include <cmath>
#include <sstream>

namespace adiaframe {

HamiltonianFamily::HamiltonianFamily(Eigen::Index n, Eigen::Index m, Evaluate evaluate,
                                     Gradient gradient, double hbar)
    : n_(n), m_(m), evaluate_(std::move(evaluate)), gradient_(std::move(gradient)), hbar_(hbar) {
  if (n < 1) throw ValidationError("Hamiltonian family needs at least one coordinate");
  if (m < 1) throw ValidationError("Hamiltonian family needs dim >= 1");
  if (!evaluate_) throw ValidationError("Hamiltonian family has no evaluate map");
  if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
  fd_step_ = RVector::Constant(n, 1e-5);
}

void HamiltonianFamily::set_coordinate_scale(const RVector& scale) {
  if (scale.size() != n_ || (scale.array() <= 0.0).any())
    throw ValidationError("coordinate scale must be positive with one entry per coordinate");
  fd_step_ = 1e-5 * scale;
}

void HamiltonianFamily::set_fd_step(const RVector& step) {
  if (step.size() != n_ || (step.array() <= 0.0).any())
    throw ValidationError("finite-difference step must be positive with one entry per coordinate");
  fd_step_ = step;
}

void HamiltonianFamily::check_coordinates(const RVector& x) const {
  if (x.size() != n_) {
    std::ostringstream os;
    os << "coordinate vector has " << x.size() << " entries, family expects " << n_;
    throw ValidationError(os.str());
  }
}

HermitianOperator HamiltonianFamily::hamiltonian(const RVector& x,
                                                 const ToleranceProfile& tol) const {
  check_coordinates(x);
  CMatrix h = evaluate_(x);
  if (h.rows() != m_ || h.cols() != m_) throw ValidationError("family returned wrong dimension");
  return HermitianOperator(std::move(h), tol);
}

std::vector<CMatrix> HamiltonianFamily::derivative(const RVector& x) const {
  check_coordinates(x);
  if (gradient_) {
    auto g = gradient_(x);
    if (static_cast<Eigen::Index>(g.size()) != n_)
      throw ValidationError("analytic gradient returned wrong number of operators");
    for (auto& d : g) {
      if (d.rows() != m_ || d.cols() != m_)
        throw ValidationError("analytic gradient returned wrong dimension");
      d = 0.5 * (d + d.adjoint()).eval();
    }
    return g;
  }
  std::vector<CMatrix> g;
  g.reserve(static_cast<std::size_t>(n_));
  for (Eigen::Index k = 0; k < n_; ++k) {
    RVector xp = x, xm = x;
    xp(k) += fd_step_(k);
    xm(k) -= fd_step_(k);
    CMatrix d = (evaluate_(xp) - evaluate_(xm)) / (2.0 * fd_step_(k));
    g.push_back(0.5 * (d + d.adjoint()));
  }
  return g;
}

std::vector<CMatrix> connection_ops_perturbative(const Spectrum& spectrum,
                                                 const std::vector<CMatrix>& force_gradient,
                                                 double hbar, const ToleranceProfile& tol) {
  const Eigen::Index m = spectrum.dim();
  const RVector& w = spectrum.eigenvalues;
  const double range = w.maxCoeff() - w.minCoeff();
  const double threshold = tol.degeneracy_gap * range;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      if (range == 0.0 || std::abs(w(j) - w(i)) < threshold) {
        std::ostringstream os;
        os << "levels " << i << " and " << j << " are degenerate (gap "
           << std::abs(w(j) - w(i)) << ", threshold " << threshold << ")";
        throw DegeneracyError(os.str());
      }

  std::vector<CMatrix> p;
  p.reserve(force_gradient.size());
  for (const auto& g : force_gradient) {
    CMatrix pk = CMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        if (i != j) pk(i, j) = kI * hbar * g(i, j) / (w(j) - w(i));
    p.push_back(std::move(pk));
  }
  return p;
}

std::vector<CMatrix> connection_ops_finite_difference(const HamiltonianFamily& fam,
                                                      const RVector& x, const Spectrum& spectrum,
                                                      const RVector& step,
                                                      const ToleranceProfile& tol) {
  if (step.size() != fam.coordinates()) throw ValidationError("step has wrong length");
  const CMatrix& u = spectrum.basis;
  std::vector<CMatrix> p;
  for (Eigen::Index k = 0; k < fam.coordinates(); ++k) {
    RVector xp = x, xm = x;
    xp(k) += step(k);
    xm(k) -= step(k);
    const Spectrum sp = hermitian_eig(fam.hamiltonian(xp, tol), &u, tol);
    const Spectrum sm = hermitian_eig(fam.hamiltonian(xm, tol), &u, tol);
    const CMatrix raw = kI * fam.hbar() * u.adjoint() * (sp.basis - sm.basis) / (2.0 * step(k));
    p.push_back(0.5 * (raw + raw.adjoint()));
  }
  return p;
}

AdiabaticFrame frame_from_spectrum(const HamiltonianFamily& fam, const RVector& x,
                                   Spectrum spectrum, ConnectionMethod method,
                                   const ToleranceProfile& tol) {
  AdiabaticFrame frame;
  frame.x = x;
  frame.hbar = fam.hbar();
  frame.degenerate_flag = spectrum.degenerate;
  frame.spectrum = std::move(spectrum);
  const CMatrix& u = frame.spectrum.basis;
  for (const auto& d : fam.derivative(x)) {
    CMatrix g = u.adjoint() * d * u;
    frame.force_gradient.push_back(0.5 * (g + g.adjoint()));
  }

  frame.method = method;
  if (method == ConnectionMethod::Perturbative) {
    try {
      frame.connections =
          connection_ops_perturbative(frame.spectrum, frame.force_gradient, fam.hbar(), tol);
    } catch (const DegeneracyError& e) {
      frame.warnings.push_back(std::string("perturbative connection unavailable (") + e.what() +
                               "); used finite differences");
      frame.method = ConnectionMethod::FiniteDifference;
    }
  }
  if (frame.method == ConnectionMethod::FiniteDifference) {
    frame.connections =
        connection_ops_finite_difference(fam, x, frame.spectrum, fam.fd_step(), tol);
  }
  if (frame.degenerate_flag) {
    frame.warnings.push_back("degenerate spectrum: connection diagonal blocks are gauge-dependent");
  }
  return frame;
}

AdiabaticFrame build_frame(const HamiltonianFamily& fam, const RVector& x,
                           const AdiabaticFrame* prev, ConnectionMethod method,
                           const ToleranceProfile& tol) {
  const CMatrix* reference = prev ? &prev->spectrum.basis : nullptr;
  return frame_from_spectrum(fam, x, hermitian_eig(fam.hamiltonian(x, tol), reference, tol),
                             method, tol);
}

CMatrix ForcePair::adiabatic_operator(std::size_t k) const {
  return adiabatic.at(k).cast<Complex>().asDiagonal();
}

ForcePair forces(const AdiabaticFrame& frame) {
  const Eigen::Index m = frame.dim();
  const RVector& w = frame.energies();
  ForcePair out;
  for (std::size_t k = 0; k < frame.connections.size(); ++k) {
    const CMatrix& g = frame.force_gradient[k];
    const CMatrix& p = frame.connections[k];
    out.adiabatic.push_back(-g.diagonal().real());

    CMatrix f = CMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        if (i != j) f(i, j) = -(kI / frame.hbar) * (w(i) - w(j)) * p(i, j);
    out.diabatic.push_back(f);

    const CMatrix total = -g;
    const double scale = std::max(total.norm(), 1e-300);
    const double r = (total - out.adiabatic_operator(k) - f).norm() / scale;
    out.decomposition_residual = std::max(out.decomposition_residual, total.norm() == 0.0 ? 0.0 : r);
  }
  return out;
}

HermitianOperator moving_frame_hamiltonian(const AdiabaticFrame& frame, const RVector& v) {
  if (v.size() != frame.coordinates()) {
    std::ostringstream os;
    os << "velocity has " << v.size() << " entries, frame has " << frame.coordinates()
       << " coordinates";
    throw ValidationError(os.str());
  }
  CMatrix h = frame.energies().cast<Complex>().asDiagonal();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != 0.0) h -= v(k) * frame.connections[static_cast<std::size_t>(k)];
  }
  return HermitianOperator::hermitian_part(h);
}

}  // namespace adiaframe
