#pragma once

#include <vector>

#include "adiaframe/adiabatic_frame.hpp"

namespace adiaframe {

/// One term C * prod_k (x^k)^exponents[k] of a matrix polynomial.
struct MonomialTerm {
  CMatrix coefficient;            // Hermitian
  std::vector<int> exponents;     // one non-negative power per coordinate

  bool operator==(const MonomialTerm&) const = default;
};

/// H(x) = sum over terms, with the analytic gradient attached.
HamiltonianFamily polynomial_family(Eigen::Index n, std::vector<MonomialTerm> terms,
                                    double hbar = 1.0);

}  // namespace adiaframe
