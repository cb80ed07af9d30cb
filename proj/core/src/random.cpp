#include "glra/random.hpp"

#include "glra/errors.hpp"

namespace glra::random {

Engine engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Engine(seq);
}

Matrix gaussian(Index rows, Index cols, Engine& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  // Column-major fill order is fixed so results only depend on the engine state.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = dist(rng);
  }
  return out;
}

Matrix low_rank(Index rows, Index cols, Index rank, Engine& rng) {
  if (rank <= 0) return Matrix::Zero(rows, cols);
  const Matrix left = gaussian(rows, rank, rng);
  const Matrix right = gaussian(rank, cols, rng);
  return left * right;
}

Matrix orthonormal(Index rows, Index cols, Engine& rng) {
  if (cols > rows) throw InputError("orthonormal: more columns than rows");
  const Matrix g = gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  return q;
}

Index uniform_index(Index lo, Index hi, Engine& rng) {
  std::uniform_int_distribution<Index> dist(lo, hi);
  return dist(rng);
}

}  // namespace glra::random
