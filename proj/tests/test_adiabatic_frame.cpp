#include <cmath>

#include "adiaframe/adiabatic_frame.hpp"
#include "adiaframe/polynomial_family.hpp"
#include "adiaframe/random.hpp"
#include "doctest.h"

using namespace adiaframe;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

RVector vec1(double x) { return RVector::Constant(1, x); }

// -(a)(sin x sigma_x + cos x sigma_z), a = hbar gamma B0 / 2.
HamiltonianFamily rotating_field(double a, double hbar = 1.0) {
  return HamiltonianFamily(
      1, 2,
      [a](const RVector& x) {
        return CMatrix(-a * (std::sin(x(0)) * pauli::x() + std::cos(x(0)) * pauli::z()));
      },
      [a](const RVector& x) {
        return std::vector<CMatrix>{
            CMatrix(-a * (std::cos(x(0)) * pauli::x() - std::sin(x(0)) * pauli::z()))};
      },
      hbar);
}

HamiltonianFamily linear_z() {
  return polynomial_family(1, {{pauli::z(), {1}}});
}

HamiltonianFamily random_family(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MonomialTerm> terms;
  terms.push_back({random_hermitian(m, rng), std::vector<int>(static_cast<std::size_t>(n), 0)});
  for (Eigen::Index k = 0; k < n; ++k) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(k)] = 1;
    terms.push_back({random_hermitian(m, rng), e});
    e[static_cast<std::size_t>(k)] = 2;
    terms.push_back({CMatrix(0.3 * random_hermitian(m, rng)), e});
  }
  return polynomial_family(n, terms);
}

}  // namespace

TEST_CASE("x sigma_z frame at x = 2") {
  const AdiabaticFrame f = build_frame(linear_z(), vec1(2.0));
  CHECK(f.energies()(0) == doctest::Approx(-2.0));
  CHECK(f.energies()(1) == doctest::Approx(2.0));
  CHECK(max_abs(f.basis().cwiseAbs() - CMatrix(pauli::x().cwiseAbs())) == 0.0);
  const ForcePair fp = forces(f);
  CHECK(fp.adiabatic[0](0) == doctest::Approx(1.0));
  CHECK(fp.adiabatic[0](1) == doctest::Approx(-1.0));
  CHECK(max_abs(fp.diabatic[0]) == 0.0);
  CHECK(max_abs(f.connections[0]) == 0.0);
}

TEST_CASE("rotating field: constant energies and analytic connection") {
  const double hbar = 0.7, a = 1.3;
  const HamiltonianFamily fam = rotating_field(a, hbar);
  for (double x : {0.0, 0.4, 1.1, 2.5}) {
    const AdiabaticFrame f = build_frame(fam, vec1(x));
    CHECK(f.energies()(0) == doctest::Approx(-a).epsilon(1e-14));
    CHECK(f.energies()(1) == doctest::Approx(a).epsilon(1e-14));
    // P = (hbar/2) sigma_y up to the sign fixed by the gauge.
    const CMatrix& p = f.connections[0];
    const double sign = p(0, 1).imag() < 0 ? 1.0 : -1.0;
    CHECK(max_abs(p - sign * 0.5 * hbar * pauli::y()) < 1e-12);

    const ForcePair fp = forces(f);
    CHECK(fp.adiabatic[0].cwiseAbs().maxCoeff() < 1e-14);
    // f = a sigma_x form: purely off-diagonal with magnitude a.
    CHECK(std::abs(fp.diabatic[0](0, 0)) == 0.0);
    CHECK(std::abs(fp.diabatic[0](1, 1)) == 0.0);
    CHECK(std::abs(fp.diabatic[0](0, 1)) == doctest::Approx(a).epsilon(1e-12));
    // Hand evaluation: -(i/hbar)[W, P] with W = -a sigma_z.
    const CMatrix w = -a * pauli::z();
    CHECK(max_abs(fp.diabatic[0] - Complex(0, -1.0 / hbar) * commutator(w, p)) < 1e-12);

    // Moving frame: H = -a sigma_z - u P.
    const double u = 0.37;
    const auto h = moving_frame_hamiltonian(f, vec1(u));
    CHECK(max_abs(h.matrix() - (w - u * p)) < 1e-14);
    CHECK(max_abs(moving_frame_hamiltonian(f, vec1(0.0)).matrix() - w) < 1e-14);
  }
}

TEST_CASE("constant family has zero connections") {
  Rng rng(2);
  const CMatrix h0 = random_hermitian(3, rng);
  const HamiltonianFamily fam(1, 3, [h0](const RVector&) { return h0; });
  const AdiabaticFrame f = build_frame(fam, vec1(0.5));
  CHECK(max_abs(f.connections[0]) == 0.0);
  const auto fd = connection_ops_finite_difference(fam, vec1(0.5), f.spectrum, vec1(1e-4));
  CHECK(max_abs(fd[0]) < 1e-9);
  const auto h = moving_frame_hamiltonian(f, vec1(3.0));
  CHECK(max_abs(h.matrix() - f.energies().cast<Complex>().asDiagonal().toDenseMatrix()) == 0.0);
}

TEST_CASE("perturbative and finite-difference connections agree to O(h^2)") {
  const HamiltonianFamily fam = random_family(2, 4, 17);
  const RVector x = Eigen::Vector2d(0.3, -0.2);
  const AdiabaticFrame f = build_frame(fam, x);
  auto offdiag_error = [&](double h) {
    const auto fd = connection_ops_finite_difference(fam, x, f.spectrum, RVector::Constant(2, h));
    double e = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      CMatrix d = fd[k] - f.connections[k];
      d.diagonal().setZero();
      e = std::max(e, max_abs(d));
    }
    return e;
  };
  const double e1 = offdiag_error(2e-2), e2 = offdiag_error(1e-2), e3 = offdiag_error(5e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("frame invariants on a random family") {
  const HamiltonianFamily fam = random_family(2, 4, 23);
  const RVector x = Eigen::Vector2d(-0.4, 0.7);
  const AdiabaticFrame f = build_frame(fam, x);
  const ForcePair fp = forces(f);
  CHECK(fp.decomposition_residual < 1e-8);
  const auto dh = fam.derivative(x);
  for (std::size_t k = 0; k < 2; ++k) {
    const CMatrix& p = f.connections[k];
    CHECK(hermiticity_residual(p) < 1e-12);
    CHECK(p.diagonal().cwiseAbs().maxCoeff() <= 5e-8 * p.norm());
    CHECK(fp.diabatic[k].diagonal().cwiseAbs().maxCoeff() <= 1e-12 * fp.diabatic[k].norm());
    // Transformed total force equals F + f.
    const CMatrix total = -(f.basis().adjoint() * dh[k] * f.basis());
    CHECK((total - fp.adiabatic_operator(k) - fp.diabatic[k]).norm() < 1e-8 * total.norm());
  }
  // Hellmann-Feynman against centered differences of the eigenvalues.
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < 2; ++k) {
    RVector xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    const RVector slope = (build_frame(fam, xp).energies() - build_frame(fam, xm).energies()) / (2 * h);
    CHECK((slope + fp.adiabatic[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("physics is unchanged by a diagonal regauge") {
  const HamiltonianFamily fam = random_family(2, 4, 31);
  const RVector x = Eigen::Vector2d(0.1, 0.2);
  const AdiabaticFrame f = build_frame(fam, x);
  Spectrum s = f.spectrum;
  Rng rng(99);
  CVector phases(4);
  for (Eigen::Index k = 0; k < 4; ++k) phases(k) = std::polar(1.0, 6.28 * rng.uniform());
  s.basis = s.basis * phases.asDiagonal();
  const AdiabaticFrame g = frame_from_spectrum(fam, x, s);
  const ForcePair a = forces(f), b = forces(g);
  CHECK((f.energies() - g.energies()).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    // Operators transform covariantly; moduli and the transformed diabatic force agree.
    const CMatrix back = phases.asDiagonal() * b.diabatic[k] * phases.conjugate().asDiagonal();
    CHECK(max_abs(back - a.diabatic[k]) < 1e-10);
    CHECK(max_abs(CMatrix(f.connections[k].cwiseAbs() - g.connections[k].cwiseAbs())) < 1e-10);
  }
}

TEST_CASE("finite-difference gradient fallback") {
  const HamiltonianFamily analytic = random_family(1, 3, 41);
  const HamiltonianFamily numeric(1, 3, [analytic](const RVector& x) {
    return analytic.hamiltonian(x).matrix();
  });
  CHECK_FALSE(numeric.has_analytic_gradient());
  const auto a = analytic.derivative(vec1(0.2));
  const auto n = numeric.derivative(vec1(0.2));
  CHECK(max_abs(a[0] - n[0]) < 1e-8);
}

TEST_CASE("degeneracy handling") {
  RVector d(3);
  d << 0.0, 0.0, 1.0;
  const CMatrix h0 = d.cast<Complex>().asDiagonal();
  Rng rng(6);
  const CMatrix h1 = random_hermitian(3, rng);
  const HamiltonianFamily fam = polynomial_family(1, {{h0, {0}}, {h1, {2}}});
  const AdiabaticFrame f = build_frame(fam, vec1(0.0));
  CHECK(f.degenerate_flag);
  CHECK(f.method == ConnectionMethod::FiniteDifference);
  CHECK_FALSE(f.warnings.empty());
  CHECK_THROWS_AS(connection_ops_perturbative(f.spectrum, f.force_gradient, 1.0), DegeneracyError);
}

TEST_CASE("errors") {
  const AdiabaticFrame f = build_frame(linear_z(), vec1(1.0));
  CHECK_THROWS_AS(moving_frame_hamiltonian(f, RVector::Zero(2)), ValidationError);
  CHECK_THROWS_AS(build_frame(linear_z(), RVector::Zero(2)), ValidationError);
  CHECK_THROWS_AS(HamiltonianFamily(0, 2, [](const RVector&) { return CMatrix(); }), ValidationError);
  CHECK_THROWS_AS(polynomial_family(1, {{pauli::z(), {1, 0}}}), ValidationError);
  CHECK_THROWS_AS(polynomial_family(1, {{CMatrix(pauli::z() + kI * pauli::identity()), {1}}}),
                  ValidationError);
}
