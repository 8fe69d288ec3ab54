#include <cmath>

#include "adiaframe/operator_core.hpp"
#include "adiaframe/quantum_state.hpp"
#include "adiaframe/random.hpp"
#include "doctest.h"

using namespace adiaframe;

namespace {

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("hermitian operator validation") {
  CHECK_THROWS_AS(HermitianOperator(mat2(0, 1, 0, 0)), ValidationError);
  CHECK_THROWS_AS(HermitianOperator(CMatrix(2, 3)), ValidationError);
  CHECK_THROWS_AS(HermitianOperator(CMatrix(0, 0)), ValidationError);
  CMatrix nan = pauli::x();
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(HermitianOperator{nan}, ValidationError);

  // A residual below tolerance is accepted and symmetrized.
  CMatrix near = pauli::x();
  near(0, 1) += 1e-14;
  HermitianOperator h(near);
  CHECK(hermiticity_residual(h.matrix()) == 0.0);
}

TEST_CASE("eig of diag(1, -1)") {
  const Spectrum s = hermitian_eig(HermitianOperator::diagonal(Eigen::Vector2d(1.0, -1.0)));
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(1, 0) = 1.0;
  expected(0, 1) = 1.0;
  CHECK(max_abs(s.basis - expected) < 1e-15);
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("eig of pauli x with gauge fixing") {
  const Spectrum s = hermitian_eig(HermitianOperator(pauli::x()));
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(max_abs(s.basis.col(0) - Eigen::Vector2cd(r, -r)) < 1e-14);
  CHECK(max_abs(s.basis.col(1) - Eigen::Vector2cd(r, r)) < 1e-14);
}

TEST_CASE("random 5x5 reconstruction and determinism") {
  Rng rng(11);
  const HermitianOperator h(random_hermitian(5, rng));
  const Spectrum s = hermitian_eig(h);
  const CMatrix rec = s.basis * s.eigenvalues.cast<Complex>().asDiagonal() * s.basis.adjoint();
  CHECK((rec - h.matrix()).norm() < 1e-11);
  CHECK(unitarity_residual(s.basis) < 1e-10);
  for (Eigen::Index k = 1; k < 5; ++k) CHECK(s.eigenvalues(k) >= s.eigenvalues(k - 1));
  // Largest-magnitude component real and positive.
  for (Eigen::Index k = 0; k < 5; ++k) {
    Eigen::Index i;
    s.basis.col(k).cwiseAbs().maxCoeff(&i);
    CHECK(s.basis(i, k).imag() == 0.0);
    CHECK(s.basis(i, k).real() > 0.0);
  }
  const Spectrum again = hermitian_eig(h);
  CHECK(again.basis == s.basis);
  CHECK(again.eigenvalues == s.eigenvalues);
}

TEST_CASE("reference gauge: phases and label continuity") {
  // Labels follow the reference through a crossing of x sigma_z.
  const Spectrum a = hermitian_eig(HermitianOperator(pauli::z()));
  const Spectrum b = hermitian_eig(HermitianOperator(CMatrix(-pauli::z())), a.basis);
  CHECK(b.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(b.eigenvalues(1) == doctest::Approx(-1.0));
  CHECK(b.permutation == std::vector<Eigen::Index>{1, 0});
  CHECK(b.reordered());
  CHECK(max_abs(b.basis - a.basis) < 1e-15);

  // Overlap with reference column is real positive.
  Rng rng(5);
  const CMatrix h0 = random_hermitian(4, rng);
  const CMatrix dh = random_hermitian(4, rng);
  const Spectrum s0 = hermitian_eig(HermitianOperator(h0));
  const Spectrum s1 = hermitian_eig(HermitianOperator(CMatrix(h0 + 1e-3 * dh)), s0.basis);
  for (Eigen::Index k = 0; k < 4; ++k) {
    const Complex ov = s0.basis.col(k).dot(s1.basis.col(k));
    CHECK(std::abs(ov.imag()) < 1e-14);
    CHECK(ov.real() > 0.99);
  }
  CHECK_THROWS_AS(hermitian_eig(HermitianOperator(h0), CMatrix::Identity(3, 3).eval()),
                  ValidationError);
}

TEST_CASE("continuity along a path is linear in the step") {
  Rng rng(21);
  const CMatrix h0 = random_hermitian(4, rng);
  const CMatrix h1 = random_hermitian(4, rng);
  auto jump = [&](double dt) {
    const Spectrum s0 = hermitian_eig(HermitianOperator(CMatrix(h0 + 0.3 * h1)));
    const Spectrum s1 = hermitian_eig(HermitianOperator(CMatrix(h0 + (0.3 + dt) * h1)), s0.basis);
    return (s1.basis - s0.basis).norm();
  };
  const double r = jump(1e-3) / jump(5e-4);
  CHECK(r == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("degenerate block is flagged and aligned to the reference") {
  RVector d(3);
  d << 1.0, 1.0, 2.0;
  const HermitianOperator h = HermitianOperator::diagonal(d);
  CHECK(hermitian_eig(h).degenerate);
  Rng rng(3);
  CMatrix ref = CMatrix::Identity(3, 3);
  ref.topLeftCorner(2, 2) = haar_unitary(2, rng);
  const Spectrum s = hermitian_eig(h, ref);
  CHECK(s.degenerate);
  CHECK(max_abs(s.basis - ref) < 1e-12);
}

TEST_CASE("commutator") {
  CHECK(max_abs(commutator(pauli::z(), pauli::y()) - Complex(0, -2) * pauli::x()) < 1e-15);
  Rng rng(8);
  const CMatrix a = random_hermitian(4, rng), b = random_hermitian(4, rng);
  CHECK(max_abs(commutator(a, a)) == 0.0);
  const CMatrix c = commutator(a, b);
  CHECK(max_abs(c.adjoint() + c) < 1e-13);
  CHECK(max_abs(c + commutator(b, a)) < 1e-13);
  CHECK_THROWS_AS(commutator(a, pauli::x()), ValidationError);
}

TEST_CASE("expectation") {
  const double p = 0.3;
  CMatrix rho = CMatrix::Zero(2, 2);
  rho(0, 0) = p;
  rho(1, 1) = 1 - p;
  CHECK(expectation(rho, pauli::z()) == doctest::Approx(2 * p - 1));

  Rng rng(4);
  const CMatrix a = random_hermitian(3, rng);
  CHECK(expectation(QuantumState::maximally_mixed(3).rho(), a) ==
        doctest::Approx(a.trace().real() / 3.0));

  const double r = 1.0 / std::sqrt(2.0);
  const QuantumState psi = QuantumState::from_amplitudes(Eigen::Vector2cd(r, r));
  CHECK(expectation(psi.rho(), pauli::x()) == doctest::Approx(1.0));

  // A non-Hermitian "state" leaves an imaginary residual.
  CMatrix bad = rho;
  bad(0, 1) = 0.2;
  CHECK_THROWS_AS(expectation(bad, pauli::y()), NumericalError);
  CHECK_THROWS_AS(expectation(rho, a), ValidationError);
}

TEST_CASE("spectral function") {
  RVector d(2);
  d << 0.0, std::log(2.0);
  const auto e = spectral_function(HermitianOperator::diagonal(d), [](double w) { return std::exp(w); });
  CHECK(e(0, 0).real() == 1.0);
  CHECK(e(1, 1).real() == doctest::Approx(2.0).epsilon(1e-15));

  RVector levels(4);
  levels << 0, 1, 2, 3;
  const auto step = spectral_function(HermitianOperator::diagonal(levels),
                                      [](double w) { return 1.5 - w >= 0 ? 1.0 : 0.0; });
  RVector expected(4);
  expected << 1, 1, 0, 0;
  CHECK(max_abs(step.matrix() - expected.cast<Complex>().asDiagonal().toDenseMatrix()) == 0.0);

  Rng rng(9);
  const HermitianOperator h(random_hermitian(4, rng));
  const auto sq = spectral_function(h, [](double w) { return w * w; });
  CHECK(max_abs(sq.matrix() - h.matrix() * h.matrix()) < 1e-11);
  const auto id = spectral_function(h, [](double w) { return w; });
  CHECK(max_abs(id.matrix() - h.matrix()) < 1e-11);

  CHECK_THROWS_AS(spectral_function(HermitianOperator(pauli::z()), [](double w) { return std::log(w); }),
                  DomainError);
}

TEST_CASE("quantum state validation") {
  CHECK_THROWS_AS(QuantumState::from_amplitudes(Eigen::Vector2cd(1.0, 1.0)), ValidationError);
  CHECK_THROWS_AS(QuantumState(CMatrix::Identity(2, 2).eval()), ValidationError);
  RVector neg(2);
  neg << 1.2, -0.2;
  CHECK_THROWS_AS(QuantumState::diagonal(neg), ValidationError);
  CHECK(QuantumState::maximally_mixed(4).purity() == doctest::Approx(0.25));
  CHECK(QuantumState::from_amplitudes(Eigen::Vector2cd(0.6, 0.8)).purity() == doctest::Approx(1.0));
}

TEST_CASE("tolerance profiles") {
  CHECK(ToleranceProfile::named("default").hermiticity == 1e-12);
  CHECK(ToleranceProfile::named("strict").hermiticity == doctest::Approx(1e-13));
  CHECK(ToleranceProfile::named("loose").ledger_relative == doctest::Approx(1e-4));
  CHECK_THROWS_AS(ToleranceProfile::named("fuzzy"), ValidationError);
}
