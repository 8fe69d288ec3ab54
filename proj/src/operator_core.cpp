#include "adiaframe/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <tuple>

namespace adiaframe {

ToleranceProfile ToleranceProfile::named(std::string_view name) {
  ToleranceProfile p;
  if (name.empty() || name == "default") return p;
  double scale = 0.0;
  if (name == "strict") {
    scale = 0.1;
  } else if (name == "loose") {
    scale = 100.0;
  } else {
    throw ValidationError("unknown tolerance profile '" + std::string(name) +
                          "' (expected default, strict or loose)");
  }
  p.hermiticity *= scale;
  p.unitarity *= scale;
  p.reconstruction *= scale;
  p.imaginary_residual *= scale;
  p.trace *= scale;
  p.positivity *= scale;
  p.trace_drift_per_step *= scale;
  p.ledger_relative *= scale;
  p.entropy_drift *= scale;
  p.entropy_negative_eigenvalue *= scale;
  p.projector *= scale;
  return p;
}

ToleranceProfile ToleranceProfile::from_environment() {
  const char* env = std::getenv("ADIAFRAME_TOLERANCE_PROFILE");
  return named(env ? std::string_view(env) : std::string_view());
}

const ToleranceProfile& default_tolerances() {
  static const ToleranceProfile profile;
  return profile;
}

double hermiticity_residual(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double unitarity_residual(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).norm();
}

HermitianOperator::HermitianOperator(CMatrix m, const ToleranceProfile& tol) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << "Hermitian operator must be square with dim >= 1, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
  if (!m.allFinite()) throw ValidationError("Hermitian operator has non-finite entries");
  const double r = hermiticity_residual(m);
  if (r > tol.hermiticity) {
    std::ostringstream os;
    os << "matrix is not self-adjoint: relative residual " << r << " > " << tol.hermiticity;
    throw ValidationError(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::hermitian_part(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("hermitian_part of a non-square matrix");
  return HermitianOperator(CMatrix(0.5 * (a + a.adjoint())), Trusted{});
}

HermitianOperator HermitianOperator::diagonal(const RVector& d) {
  if (d.size() < 1) throw ValidationError("diagonal operator needs dim >= 1");
  return HermitianOperator(CMatrix(d.cast<Complex>().asDiagonal()), Trusted{});
}

bool Spectrum::reordered() const {
  for (std::size_t k = 0; k < permutation.size(); ++k)
    if (permutation[k] != static_cast<Eigen::Index>(k)) return true;
  return false;
}

namespace {

// Largest-magnitude component real and positive; first index wins ties.
void fix_max_component_phase(Eigen::Ref<CVector> v) {
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  if (best_mag > 0.0) {
    v *= std::conj(v(best)) / best_mag;
    v(best) = std::abs(v(best));
  }
}

// Groups of consecutive (ascending) eigenvalues closer than the gap threshold.
std::vector<std::pair<Eigen::Index, Eigen::Index>> degenerate_blocks(const RVector& w,
                                                                    double rel_gap) {
  const Eigen::Index m = w.size();
  const double range = w(m - 1) - w(0);
  const double threshold = rel_gap * range;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // [begin, end)
  Eigen::Index begin = 0;
  for (Eigen::Index k = 1; k <= m; ++k) {
    const bool split = k == m || (range > 0.0 && (w(k) - w(k - 1)) >= threshold);
    if (split) {
      blocks.emplace_back(begin, k);
      begin = k;
    }
  }
  return blocks;
}

}  // namespace

Spectrum hermitian_eig(const HermitianOperator& h, const CMatrix* reference,
                       const ToleranceProfile& tol) {
  const Eigen::Index m = h.dim();
  if (reference && (reference->rows() != m || reference->cols() != m)) {
    throw ValidationError("continuity reference has wrong dimension");
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver did not converge (dim " << m << ", Frobenius norm "
       << h.matrix().norm() << ", max |entry| " << h.matrix().cwiseAbs().maxCoeff() << ")";
    throw NumericalError(os.str());
  }
  const RVector ascending = solver.eigenvalues();
  const CMatrix vectors = solver.eigenvectors();
  const auto blocks = degenerate_blocks(ascending, tol.degeneracy_gap);

  Spectrum out;
  out.degenerate = static_cast<Eigen::Index>(blocks.size()) < m;
  out.eigenvalues.resize(m);
  out.basis.resize(m, m);
  out.permutation.resize(static_cast<std::size_t>(m));

  if (!reference) {
    out.eigenvalues = ascending;
    out.basis = vectors;
    for (Eigen::Index k = 0; k < m; ++k) {
      fix_max_component_phase(out.basis.col(k));
      out.permutation[static_cast<std::size_t>(k)] = k;
    }
  } else {
    const CMatrix& ref = *reference;
    const CMatrix overlap = ref.adjoint() * vectors;  // (reference column, solver column)

    // Weight of each reference column inside each block subspace.
    struct Candidate {
      double weight;
      Eigen::Index ref_col;
      std::size_t block;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(m) * blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto [begin, end] = blocks[b];
      for (Eigen::Index r = 0; r < m; ++r) {
        const double w = overlap.row(r).segment(begin, end - begin).squaredNorm();
        candidates.push_back({w, r, b});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });

    std::vector<std::vector<Eigen::Index>> assigned(blocks.size());
    std::vector<bool> ref_taken(static_cast<std::size_t>(m), false);
    for (const auto& c : candidates) {
      const auto [begin, end] = blocks[c.block];
      auto& slot = assigned[c.block];
      if (ref_taken[static_cast<std::size_t>(c.ref_col)]) continue;
      if (static_cast<Eigen::Index>(slot.size()) >= end - begin) continue;
      slot.push_back(c.ref_col);
      ref_taken[static_cast<std::size_t>(c.ref_col)] = true;
    }

    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto [begin, end] = blocks[b];
      const Eigen::Index d = end - begin;
      auto cols = assigned[b];
      std::sort(cols.begin(), cols.end());

      CMatrix block = vectors.middleCols(begin, d);
      CMatrix ref_block(m, d);
      for (Eigen::Index j = 0; j < d; ++j) ref_block.col(j) = ref.col(cols[static_cast<std::size_t>(j)]);

      // Polar alignment: block * X * Y^dag makes block^dag * ref_block Hermitian PSD.
      const CMatrix mixed = block.adjoint() * ref_block;
      Eigen::JacobiSVD<CMatrix> svd(mixed, Eigen::ComputeFullU | Eigen::ComputeFullV);
      block = block * svd.matrixU() * svd.matrixV().adjoint();

      for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Index target = cols[static_cast<std::size_t>(j)];
        CVector v = block.col(j);
        const Complex ov = ref.col(target).dot(v);
        if (std::abs(ov) > 1e-12) {
          v *= std::conj(ov) / std::abs(ov);
        } else {
          fix_max_component_phase(v);
        }
        out.basis.col(target) = v;
        out.eigenvalues(target) = ascending(begin + j);
        out.permutation[static_cast<std::size_t>(target)] = begin + j;
      }
    }
  }

  const double scale = std::max(h.matrix().norm(), 1e-300);
  const double recon =
      (out.basis * out.eigenvalues.cast<Complex>().asDiagonal() * out.basis.adjoint() -
       h.matrix())
          .norm() /
      scale;
  const double unit = unitarity_residual(out.basis);
  if (recon > tol.reconstruction * std::sqrt(static_cast<double>(m)) || unit > tol.unitarity * std::sqrt(static_cast<double>(m))) {
    std::ostringstream os;
    os << "eigendecomposition residuals too large (reconstruction " << recon << ", unitarity "
       << unit << ", dim " << m << ")";
    throw NumericalError(os.str());
  }
  return out;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ValidationError("commutator: dimension mismatch");
  }
  return a * b - b * a;
}

double expectation(const CMatrix& rho, const CMatrix& a, const ToleranceProfile& tol) {
  if (rho.rows() != a.rows() || rho.cols() != a.cols()) {
    throw ValidationError("expectation: dimension mismatch");
  }
  Complex tr = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j) tr += rho(i, j) * a(j, i);
  const double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
  if (std::abs(tr.imag()) > tol.imaginary_residual * scale) {
    std::ostringstream os;
    os << "expectation has imaginary part " << tr.imag()
       << "; state or observable is not Hermitian";
    throw NumericalError(os.str());
  }
  return tr.real();
}

HermitianOperator spectral_function(const HermitianOperator& h,
                                    const std::function<double(double)>& f,
                                    const ToleranceProfile& tol) {
  const Eigen::Index m = h.dim();
  auto apply = [&](double w) {
    const double y = f(w);
    if (!std::isfinite(y)) {
      std::ostringstream os;
      os << "spectral function undefined at eigenvalue " << w;
      throw DomainError(os.str());
    }
    return y;
  };

  bool diagonal = true;
  for (Eigen::Index i = 0; i < m && diagonal; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j && h(i, j) != Complex(0.0)) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    RVector d(m);
    for (Eigen::Index i = 0; i < m; ++i) d(i) = apply(h(i, i).real());
    return HermitianOperator::diagonal(d);
  }

  const Spectrum s = hermitian_eig(h, nullptr, tol);
  RVector fw(m);
  for (Eigen::Index i = 0; i < m; ++i) fw(i) = apply(s.eigenvalues(i));
  return HermitianOperator::hermitian_part(s.basis * fw.cast<Complex>().asDiagonal() *
                                           s.basis.adjoint());
}

namespace pauli {
CMatrix identity() { return CMatrix::Identity(2, 2); }
CMatrix x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
CMatrix y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}
CMatrix z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

}  // namespace adiaframe
