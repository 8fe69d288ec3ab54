#include <cmath>

#include "adiaframe/dynamics.hpp"
#include "adiaframe/entropy_audit.hpp"
#include "adiaframe/polynomial_family.hpp"
#include "adiaframe/random.hpp"
#include "doctest.h"

using namespace adiaframe;

namespace {

RVector vec1(double x) { return RVector::Constant(1, x); }

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CMatrix diag(std::initializer_list<double> d) {
  RVector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.cast<Complex>().asDiagonal();
}

CMatrix plus_state() { return CMatrix::Constant(2, 2, 0.5); }

HamiltonianFamily rotating_field(double a) {
  return HamiltonianFamily(
      1, 2,
      [a](const RVector& x) {
        return CMatrix(-a * (std::sin(x(0)) * pauli::x() + std::cos(x(0)) * pauli::z()));
      },
      [a](const RVector& x) {
        return std::vector<CMatrix>{
            CMatrix(-a * (std::cos(x(0)) * pauli::x() - std::sin(x(0)) * pauli::z()))};
      });
}

}  // namespace

TEST_CASE("von neumann entropy examples") {
  CHECK(von_neumann_entropy(diag({1.0, 0.0})) == 0.0);
  CHECK(von_neumann_entropy(plus_state()) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(von_neumann_entropy(plus_state())) < 1e-12);
  CHECK(von_neumann_entropy(diag({0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double s = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  CHECK(von_neumann_entropy(diag({0.25, 0.75})) == doctest::Approx(s).epsilon(1e-15));
  CHECK(s == doctest::Approx(0.5623).epsilon(1e-4));
  CHECK(von_neumann_entropy(diag({0.25, 0.75}), 2.0) == doctest::Approx(2.0 * s));
  // Tiny negative eigenvalues are clipped; larger ones are rejected.
  CHECK(von_neumann_entropy(diag({1.0 + 1e-10, -1e-10})) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK_THROWS_AS(von_neumann_entropy(diag({1.1, -0.1})), ValidationError);
}

TEST_CASE("project") {
  const Projector p = Projector::adiabatic(2);
  CHECK(max_abs(project(diag({0.3, 0.7}), p) - diag({0.3, 0.7})) == 0.0);
  CHECK(max_abs(project(plus_state(), p) - diag({0.5, 0.5})) == 0.0);

  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const CMatrix rho = random_density_matrix(4, rng);
    const CMatrix once = project(rho, Projector::adiabatic(4));
    CHECK(project(once, Projector::adiabatic(4)) == once);
    CHECK(once.trace() == rho.trace());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(once);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }

  // Rotated rank-1 family agrees with the explicit sum of P rho P.
  const CMatrix u = haar_unitary(3, rng);
  const Projector r = Projector::rank_one(u);
  const CMatrix rho = random_density_matrix(3, rng);
  CMatrix expected = CMatrix::Zero(3, 3);
  for (Eigen::Index k = 0; k < 3; ++k) {
    const CMatrix pk = u.col(k) * u.col(k).adjoint();
    expected += pk * rho * pk;
  }
  CHECK(max_abs(project(rho, r) - expected) < 1e-14);
  for (const auto& op : r.operators()) CHECK(max_abs(op * op - op) < 1e-12);

  // Rank-2 plus rank-1 block family.
  CMatrix a = CMatrix::Zero(3, 3), b = CMatrix::Zero(3, 3);
  a(0, 0) = a(1, 1) = 1.0;
  b(2, 2) = 1.0;
  const Projector blocks = Projector::from_operators({a, b});
  const CMatrix pinched = project(rho, blocks);
  CHECK(pinched(0, 1) == rho(0, 1));
  CHECK(pinched(0, 2) == Complex(0.0));

  CHECK_THROWS_AS(Projector::from_operators({a}), ValidationError);
  CHECK_THROWS_AS(Projector::from_operators({a, a}), ValidationError);
  CHECK_THROWS_AS(Projector::from_operators({CMatrix(0.5 * a), b}), ValidationError);
  CHECK_THROWS_AS(project(rho, Projector::adiabatic(2)), ValidationError);
}

TEST_CASE("entropy delta examples") {
  const EntropyDelta pure = entropy_delta(plus_state());
  CHECK(std::abs(pure.before) < 1e-12);
  CHECK(std::abs(pure.delta() - std::log(2.0)) < 1e-12);
  CHECK(entropy_delta(diag({0.2, 0.3, 0.5})).delta() == 0.0);
}

TEST_CASE("monotonicity suite over 1000 random 4-level states") {
  const MonotonicitySuite suite = entropy_monotonicity_suite(4, 1000, 2024);
  CHECK(suite.samples == 1000);
  CHECK(suite.passes == 1000);
  CHECK(suite.min_delta >= -1e-12);
  CHECK(suite.draws.size() == 1000);
  const MonotonicitySuite again = entropy_monotonicity_suite(4, 1000, 2024);
  CHECK(again.min_delta == suite.min_delta);
  CHECK(again.draws.back().after == suite.draws.back().after);
}

TEST_CASE("projected diabatic force is a structural zero") {
  Rng rng(77);
  for (int i = 0; i < 25; ++i) {
    std::vector<MonomialTerm> terms{{random_hermitian(4, rng), {0, 0}},
                                    {random_hermitian(4, rng), {1, 0}},
                                    {random_hermitian(4, rng), {0, 1}}};
    const AdiabaticFrame frame =
        build_frame(polynomial_family(2, terms), Eigen::Vector2d(rng.normal(), rng.normal()));
    const CMatrix rho = random_density_matrix(4, rng);
    const RVector t = projected_diabatic_force(frame, rho);
    const ForcePair fp = forces(frame);
    for (Eigen::Index k = 0; k < 2; ++k)
      CHECK(std::abs(t(k)) < 1e-13 * fp.diabatic[static_cast<std::size_t>(k)].norm());
  }

  // The unprojected coherent state feels a diabatic force.
  const AdiabaticFrame frame = build_frame(rotating_field(1.0), vec1(0.3));
  const CMatrix coherent = plus_state();
  const double direct = (coherent * forces(frame).diabatic[0]).trace().real();
  CHECK(std::abs(direct) > 0.1);
  CHECK(projected_diabatic_force(frame, coherent)(0) == 0.0);

  // Constant family: f = 0.
  const CMatrix h0 = random_hermitian(3, rng);
  const AdiabaticFrame flat = build_frame(HamiltonianFamily(1, 3, [h0](const RVector&) { return h0; }), vec1(0.0));
  CHECK(projected_diabatic_force(flat, random_density_matrix(3, rng))(0) == 0.0);
}

TEST_CASE("entropy is unitarily invariant") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const CMatrix rho = random_density_matrix(5, rng);
    const CMatrix v = haar_unitary(5, rng);
    CHECK(std::abs(von_neumann_entropy(CMatrix(v * rho * v.adjoint())) - von_neumann_entropy(rho)) < 1e-10);
  }
}

TEST_CASE("unitary invariance audit along driven runs") {
  Rng rng(12);
  const HamiltonianFamily fam =
      polynomial_family(1, {{random_hermitian(3, rng), {0}}, {random_hermitian(3, rng), {1}}});
  CMatrix rho0 = random_density_matrix(3, rng);

  DrivenScenario sc;
  sc.family = fam;
  sc.path = DrivenPath::linear(vec1(-0.5), vec1(1.0));
  sc.rho0 = rho0;
  sc.control = {1e-3, 1000, 1};
  const Trajectory free_run = run_driven(sc);
  const UnitaryInvarianceReport a = unitary_invariance_audit(free_run);
  CHECK(a.raw_drift < 1e-7);
  CHECK(a.projection_jump == 0.0);

  // Halving dt shrinks the drift.
  sc.control = {2e-3, 500, 1};
  const double coarse = unitary_invariance_audit(run_driven(sc)).raw_drift;
  CHECK(coarse > a.raw_drift);

  // Stationary state: no drift.
  DrivenScenario still = sc;
  still.path = DrivenPath::linear(vec1(0.1), vec1(0.0));
  still.rho0 = diag({0.2, 0.3, 0.5});
  CHECK(unitary_invariance_audit(run_driven(still)).raw_drift < 1e-14);

  // One projection at step 500.
  sc.control = {1e-3, 1000, 1};
  sc.projection_steps = {500};
  const Trajectory pinched = run_driven(sc);
  REQUIRE(pinched.projections.size() == 1);
  const ProjectionEvent& ev = pinched.projections.front();
  CHECK(ev.delta() > 1e-3);
  const double before = pinched.samples[499].entropy;
  const double after = pinched.samples[500].entropy;
  CHECK(std::abs((after - before) - ev.delta()) < 1e-10);
  const UnitaryInvarianceReport b = unitary_invariance_audit(pinched);
  CHECK(std::abs(b.projection_jump - ev.delta()) < 1e-15);
  CHECK(b.unexplained_drift < 1e-7);
  CHECK(b.raw_drift > ev.delta() - 1e-7);
}
