#include <cmath>

#include "adiaframe/polynomial_family.hpp"
#include "adiaframe/random.hpp"
#include "adiaframe/thermo.hpp"
#include "doctest.h"

using namespace adiaframe;

namespace {

RVector levels(std::initializer_list<double> v) {
  RVector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

RVector vec1(double x) { return RVector::Constant(1, x); }

HamiltonianFamily diagonal_family(const RVector& w0, const RVector& slope) {
  return polynomial_family(1, {{CMatrix(w0.cast<Complex>().asDiagonal()), {0}},
                               {CMatrix(slope.cast<Complex>().asDiagonal()), {1}}});
}

HamiltonianFamily goe_family(Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  const CMatrix a = goe(m, rng).cast<Complex>();
  const CMatrix b = goe(m, rng).cast<Complex>();
  return HamiltonianFamily(
      1, m, [a, b](const RVector& x) { return CMatrix(a + x(0) * b); },
      [b](const RVector&) { return std::vector<CMatrix>{b}; });
}

// Simpson weights on n + 1 points (n even) over [0, L].
RVector simpson_weights(int n, double L) {
  RVector w(n + 1);
  const double h = L / n;
  for (int i = 0; i <= n; ++i) w(i) = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  return w * (h / 3.0);
}

// Direct double quadrature of the canonical correlation integral
// int_0^beta dl int_0^inf dt exp(-eta t) <f(-i hbar l) f(t)>, with
// f(t) = exp(iWt/hbar) f exp(-iWt/hbar) built from the matrices.
double kubo_quadrature(const RVector& w, const CMatrix& f, double beta, double eta, double hbar) {
  const Eigen::Index m = w.size();
  const CMatrix rho = canonical_state(w, beta).rho();
  auto evolve = [&](Complex s) {
    const CVector phase = (s * w.cast<Complex>()).array().exp();
    return CMatrix(phase.asDiagonal() * f * phase.conjugate().asDiagonal());
  };
  // Imaginary-time factor: exp(lW) f exp(-lW), real exponents.
  const int nl = 400;
  const RVector wl = simpson_weights(nl, beta);
  CMatrix a = CMatrix::Zero(m, m);
  for (int i = 0; i <= nl; ++i) {
    const double l = beta * i / nl;
    const RVector e = (l * w).array().exp();
    const RVector einv = (-l * w).array().exp();
    a += wl(i) * (e.cast<Complex>().asDiagonal() * f * einv.cast<Complex>().asDiagonal());
  }
  const double t_max = std::log(1e13) / eta;
  const int nt = 2 * static_cast<int>(t_max / 2e-3 / 2.0);
  const RVector wt = simpson_weights(nt, t_max);
  CMatrix b = CMatrix::Zero(m, m);
  for (int i = 0; i <= nt; ++i) {
    const double t = t_max * i / nt;
    b += wt(i) * std::exp(-eta * t) * evolve(Complex(0.0, t / hbar));
  }
  const Complex v = (rho * a * b).trace();
  CHECK(std::abs(v.imag()) < 1e-8 * std::abs(v.real()));
  return v.real();
}

}  // namespace

TEST_CASE("sharp counting") {
  const RVector w = levels({0, 1, 2, 3});
  CHECK(counting_function(w, 1.5) == 2.0);
  CHECK(counting_function(w, -0.1) == 0.0);
  CHECK(counting_function(w, 3.0) == 4.0);
  CHECK(counting_function(w, 10.0) == 4.0);
  double prev = 0.0;
  for (double e = -1.0; e < 4.0; e += 0.01) {
    const double c = counting_function(w, e);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("smoothed counting and density") {
  const RVector w = levels({0, 1, 2, 3});
  CHECK(smoothed_counting(w, 1.5, 0.01) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(smoothed_counting(w, 1.0, 0.2) == doctest::Approx(1.5).epsilon(1e-3));
  // Density is the derivative of the count.
  const double h = 1e-5;
  for (double e : {0.3, 1.1, 2.6}) {
    const double d = (smoothed_counting(w, e + h, 0.4) - smoothed_counting(w, e - h, 0.4)) / (2 * h);
    CHECK(smoothed_density(w, e, 0.4) == doctest::Approx(d).epsilon(1e-7));
  }
  CHECK(mean_level_spacing(w) == 1.0);
}

TEST_CASE("entropy of a two-fold count") {
  const RVector w = levels({0.0, 0.0, 10.0, 20.0});
  const ThermoCurve c = entropy_temperature(w, levels({5.0}), 0.05);
  CHECK(c.Omega(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.S(0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(entropy_temperature(w, levels({-5.0}), 0.05), DomainError);
}

TEST_CASE("harmonic spectrum matches the smoothed staircase") {
  const int m = 1000;
  const double eps = 0.5;
  RVector w(m);
  for (int j = 0; j < m; ++j) w(j) = eps * j;
  const RVector grid = RVector::LinSpaced(17, 100 * eps, 900 * eps);
  const ThermoCurve c = entropy_temperature(w, grid, 3 * eps);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double e = grid(i);
    CHECK(c.Omega(i) == doctest::Approx(e / eps).epsilon(0.03));
    CHECK(c.S(i) == doctest::Approx(std::log(e / eps)).epsilon(0.03));
    CHECK(c.T(i) == doctest::Approx(e).epsilon(0.03));
    CHECK(c.identity_residual(i) < 0.02);
  }
}

TEST_CASE("microcanonical force") {
  // Uniform shift: every level moves with slope c.
  Rng rng(3);
  const RVector w0 = RVector::LinSpaced(20, 0.0, 19.0) + 0.1 * RVector::Random(20);
  const double c = 0.7;
  const HamiltonianFamily shift = diagonal_family(w0, RVector::Constant(20, c));
  for (double e : {3.0, 9.5, 15.0})
    CHECK(microcanonical_force(shift, vec1(0.2), e, 1.0)(0) == doctest::Approx(-c).epsilon(1e-12));
  const MaxwellReport mr = maxwell_check(shift, vec1(0.2), levels({6.0, 10.0, 14.0}), 2.0);
  for (const auto& row : mr.rows) {
    CHECK(row.force(0) == doctest::Approx(-c).epsilon(1e-12));
    CHECK(row.T_dS_dx(0) == doctest::Approx(-c).epsilon(1e-6));
    CHECK(row.minus_dE_dx_S(0) == doctest::Approx(-c).epsilon(1e-6));
  }

  // Two levels W = (x, 2x) at x = 1, E at level 1.
  const HamiltonianFamily two = diagonal_family(levels({0.0, 0.0}), levels({1.0, 2.0}));
  double prev = 1.0;
  for (double s : {0.4, 0.2, 0.1}) {
    const double gap = std::abs(microcanonical_force(two, vec1(1.0), 1.0, s)(0) + 1.0);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-12);
  CHECK_THROWS_AS(microcanonical_force(two, vec1(1.0), 1e4, 0.01), DomainError);
}

TEST_CASE("maxwell identity on a 400-level random family") {
  const HamiltonianFamily fam = goe_family(400, 7);
  const RVector x = vec1(0.0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(fam.hamiltonian(x).matrix(), Eigen::EigenvaluesOnly);
  const RVector w = es.eigenvalues();
  const double spacing = mean_level_spacing(w);
  const double lo = w.minCoeff(), range = w.maxCoeff() - lo;
  const RVector grid = RVector::LinSpaced(5, lo + 0.35 * range, lo + 0.65 * range);
  const MaxwellReport full = maxwell_check(fam, x, grid, 5 * spacing);
  CHECK(full.max_deviation_entropy_form < 0.05);
  CHECK(full.max_identity_residual < 0.02);
  const MaxwellReport half = maxwell_check(fam, x, grid, 2.5 * spacing);
  CHECK(half.max_deviation_entropy_form <= 2.0 * std::max(full.max_deviation_entropy_form, 1e-3));
}

TEST_CASE("canonical state") {
  const RVector w = levels({-0.5, 0.1, 2.0});
  const QuantumState inf_t = canonical_state(w, 0.0);
  CHECK((inf_t.populations().array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);

  const double a = 0.8, beta = 1.7;
  const QuantumState two = canonical_state(levels({-a, a}), beta);
  const double p = std::exp(beta * a) / (std::exp(beta * a) + std::exp(-beta * a));
  CHECK(two.populations()(0) == doctest::Approx(p).epsilon(1e-14));
  CHECK(std::abs(two.rho().trace().real() - 1.0) < 1e-15);

  // beta Delta = 40: ground-state projector.
  const QuantumState cold = canonical_state(levels({0.0, 1.0}), 40.0);
  CHECK(std::abs(cold.populations()(0) - 1.0) < 1e-12);
  // Huge energies do not overflow.
  const QuantumState big = canonical_state(levels({1e4, 1e4 + 1.0}), 50.0);
  CHECK(std::isfinite(big.populations()(0)));
  CHECK(big.populations()(0) == doctest::Approx(1.0 / (1.0 + std::exp(-50.0))));
}

TEST_CASE("kubo friction: constant family") {
  Rng rng(4);
  const CMatrix h0 = random_hermitian(3, rng);
  const HamiltonianFamily fam(1, 3, [h0](const RVector&) { return h0; });
  const FrictionTensor g = kubo_friction(fam, vec1(0.0), 1.0, 0.1);
  CHECK(g.gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(kubo_friction(fam, vec1(0.0), 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(kubo_friction(fam, vec1(0.0), 1.0, -1.0), ValidationError);
}

TEST_CASE("kubo friction: two-level spectral sum against quadrature") {
  // -(a)(sin x sigma_x + cos x sigma_z): levels -+a, diabatic force a sigma_x-form.
  const double a = 0.6;
  const HamiltonianFamily fam(
      1, 2,
      [a](const RVector& x) {
        return CMatrix(-a * (std::sin(x(0)) * pauli::x() + std::cos(x(0)) * pauli::z()));
      },
      [a](const RVector& x) {
        return std::vector<CMatrix>{
            CMatrix(-a * (std::cos(x(0)) * pauli::x() - std::sin(x(0)) * pauli::z()))};
      });
  const AdiabaticFrame frame = build_frame(fam, vec1(0.3));
  const CMatrix f = forces(frame).diabatic[0];
  for (double beta : {0.5, 2.0}) {
    for (double eta : {0.2, 0.5}) {
      const double spectral = kubo_friction(frame, beta, eta).gamma(0, 0);
      const double direct = kubo_quadrature(frame.energies(), f, beta, eta, frame.hbar);
      CHECK(spectral > 0.0);
      CHECK(spectral == doctest::Approx(direct).epsilon(1e-4));
      // Closed form: |f_01|^2 = a^2, populations give tanh(beta a) / (2a) per ordered pair.
      const double closed = a * std::tanh(beta * a) * eta / (eta * eta + 4 * a * a);
      CHECK(spectral == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("kubo friction: real 6-level family") {
  Rng rng(61);
  std::vector<MonomialTerm> terms;
  terms.push_back({goe(6, rng).cast<Complex>(), {0, 0}});
  terms.push_back({goe(6, rng).cast<Complex>(), {1, 0}});
  terms.push_back({goe(6, rng).cast<Complex>(), {0, 1}});
  terms.push_back({CMatrix(0.2 * goe(6, rng).cast<Complex>()), {1, 1}});
  const HamiltonianFamily fam = polynomial_family(2, terms);
  for (double beta : {0.1, 1.0, 5.0}) {
    const RVector x = Eigen::Vector2d(0.2, -0.1);
    const AdiabaticFrame frame = build_frame(fam, x);
    const FrictionTensor g = kubo_friction(frame, beta, default_kubo_eta(frame.energies()));
    CHECK((g.gamma - g.gamma.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * g.gamma.cwiseAbs().maxCoeff());
    CHECK(g.gamma.diagonal().minCoeff() >= 0.0);
    // Positive semidefinite.
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (g.gamma + g.gamma.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * g.gamma.norm());

    // Adding a constant to W leaves Gamma unchanged.
    std::vector<MonomialTerm> shifted = terms;
    shifted[0].coefficient += 3.7 * CMatrix::Identity(6, 6);
    const FrictionTensor h =
        kubo_friction(polynomial_family(2, shifted), x, beta, default_kubo_eta(frame.energies()));
    CHECK((h.gamma - g.gamma).cwiseAbs().maxCoeff() <= 1e-10 * g.gamma.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("default kubo eta") {
  CHECK(default_kubo_eta(levels({0, 1, 2, 3})) == doctest::Approx(0.1));
  CHECK(default_kubo_eta(levels({0, 1, 2, 3}), 2.0) == doctest::Approx(0.05));
}
