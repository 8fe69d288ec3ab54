#include "adiaframe/polynomial_family.hpp"

#include <cmath>
#include <memory>

namespace adiaframe {

namespace {

double monomial(const RVector& x, const std::vector<int>& e) {
  double v = 1.0;
  for (std::size_t k = 0; k < e.size(); ++k) v *= std::pow(x(static_cast<Eigen::Index>(k)), e[k]);
  return v;
}

}  // namespace

HamiltonianFamily polynomial_family(Eigen::Index n, std::vector<MonomialTerm> terms,
                                    double hbar) {
  if (terms.empty()) throw ValidationError("polynomial family needs at least one term");
  const Eigen::Index m = terms.front().coefficient.rows();
  for (auto& t : terms) {
    if (static_cast<Eigen::Index>(t.exponents.size()) != n)
      throw ValidationError("monomial term needs one exponent per coordinate");
    for (int e : t.exponents)
      if (e < 0) throw ValidationError("monomial exponents must be non-negative");
    // Validates shape and Hermiticity.
    t.coefficient = HermitianOperator(t.coefficient).matrix();
    if (t.coefficient.rows() != m) throw ValidationError("monomial coefficients differ in dimension");
  }
  auto shared = std::make_shared<const std::vector<MonomialTerm>>(std::move(terms));

  auto evaluate = [shared, m](const RVector& x) {
    CMatrix h = CMatrix::Zero(m, m);
    for (const auto& t : *shared) h += monomial(x, t.exponents) * t.coefficient;
    return h;
  };
  auto gradient = [shared, m, n](const RVector& x) {
    std::vector<CMatrix> g(static_cast<std::size_t>(n), CMatrix::Zero(m, m));
    for (const auto& t : *shared) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const int e = t.exponents[static_cast<std::size_t>(k)];
        if (e == 0) continue;
        auto reduced = t.exponents;
        reduced[static_cast<std::size_t>(k)] = e - 1;
        g[static_cast<std::size_t>(k)] += (e * monomial(x, reduced)) * t.coefficient;
      }
    }
    return g;
  };
  return HamiltonianFamily(n, m, evaluate, gradient, hbar);
}

}  // namespace adiaframe
