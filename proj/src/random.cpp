#include "adiaframe/random.hpp"

#include <cmath>
#include <numbers>

namespace adiaframe {

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return -std::log(u);
}

Eigen::Index Rng::categorical(const RVector& weights) {
  const double total = weights.sum();
  const double target = uniform() * total;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    acc += weights(k);
    if (target < acc) return k;
  }
  // Rounding at the top edge: last index with nonzero weight.
  for (Eigen::Index k = weights.size() - 1; k >= 0; --k)
    if (weights(k) > 0.0) return k;
  return weights.size() - 1;
}

CMatrix ginibre(Eigen::Index m, Rng& rng) {
  CMatrix g(m, m);
  const double s = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = Complex(s * rng.normal(), s * rng.normal());
  return g;
}

CMatrix haar_unitary(Eigen::Index m, Rng& rng) {
  const CMatrix g = ginibre(m, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(m, m);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < m; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

RMatrix goe(Eigen::Index m, Rng& rng) {
  RMatrix a(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = rng.normal();
  return (a + a.transpose()) / 2.0;
}

CMatrix random_hermitian(Eigen::Index m, Rng& rng) {
  const CMatrix g = ginibre(m, rng);
  return (g + g.adjoint()) / 2.0;
}

CMatrix random_density_matrix(Eigen::Index m, Rng& rng) {
  RVector p(m);
  for (Eigen::Index k = 0; k < m; ++k) p(k) = rng.exponential();
  p /= p.sum();
  const CMatrix u = haar_unitary(m, rng);
  CMatrix rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return rho;
}

}  // namespace adiaframe
