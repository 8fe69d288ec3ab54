#pragma once

#include <cstdint>
#include <random>

#include "adiaframe/core.hpp"

namespace adiaframe {

/// Seeded generator with platform-independent derived distributions.
///
/// std::uniform_real_distribution and std::normal_distribution are
/// implementation-defined, so uniform and normal draws are derived here from
/// the raw mt19937_64 stream to keep outputs bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller (no cached second draw).
  double normal();
  /// Exponential with unit rate.
  double exponential();
  /// Index drawn from a discrete distribution with the given weights.
  Eigen::Index categorical(const RVector& weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Matrix with i.i.d. standard complex normal entries (variance 1/2 per part).
CMatrix ginibre(Eigen::Index m, Rng& rng);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
CMatrix haar_unitary(Eigen::Index m, Rng& rng);
/// Real symmetric GOE matrix, off-diagonal variance 1/2, diagonal variance 1.
RMatrix goe(Eigen::Index m, Rng& rng);
/// Random Hermitian matrix with normal entries.
CMatrix random_hermitian(Eigen::Index m, Rng& rng);
/// Density matrix: Haar-rotated eigenbasis with Dirichlet(1, ..., 1) spectrum.
CMatrix random_density_matrix(Eigen::Index m, Rng& rng);

}  // namespace adiaframe
