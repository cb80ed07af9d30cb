#pragma once

#include "glra/glra.hpp"
#include "glra/random.hpp"
#include "glra/rrr.hpp"

#include <random>

namespace support {

using glra::Index;
using glra::Matrix;
using glra::Vector;

inline Matrix spectrum(Index rows, Index cols, Index rank, glra::random::Engine& rng,
                       double lo = 0.5, double hi = 3.0) {
  if (rank == 0) return Matrix::Zero(rows, cols);
  const Matrix u = glra::random::orthonormal(rows, rank, rng);
  const Matrix v = glra::random::orthonormal(cols, rank, rng);
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector s(rank);
  for (Index i = 0; i < rank; ++i) s(i) = dist(rng);
  return u * s.asDiagonal() * v.transpose();
}

// Shapes up to max_dim, r up to max_rank; B and C are rank deficient a third of the time.
inline glra::GlraProblem problem(glra::random::Engine& rng, Index max_dim = 6,
                                 Index max_rank = 2) {
  using glra::random::uniform_index;
  const Index m = uniform_index(1, max_dim, rng);
  const Index n = uniform_index(1, max_dim, rng);
  const Index p = uniform_index(1, max_dim, rng);
  const Index q = uniform_index(1, max_dim, rng);
  glra::GlraProblem out;
  out.M = glra::random::gaussian(m, n, rng);
  out.B = uniform_index(0, 2, rng) == 0
              ? spectrum(m, p, uniform_index(1, std::min(m, p), rng), rng)
              : glra::random::gaussian(m, p, rng);
  out.C = uniform_index(0, 2, rng) == 0
              ? spectrum(q, n, uniform_index(1, std::min(q, n), rng), rng)
              : glra::random::gaussian(q, n, rng);
  out.rank = uniform_index(1, max_rank, rng);
  return out;
}

// x = mix * y + noise with y optionally confined to a proper subspace.
inline glra::rrr::SampleSet regression_data(glra::random::Engine& rng, Index samples,
                                            Index dim_f, Index dim_g, Index y_rank) {
  glra::rrr::SampleSet s;
  s.ys = glra::random::gaussian(samples, dim_g, rng);
  if (y_rank < dim_g) {
    const Matrix basis = glra::random::orthonormal(dim_g, y_rank, rng);
    s.ys = s.ys * basis * basis.transpose();
  }
  const Matrix mix = glra::random::gaussian(dim_f, dim_g, rng);
  s.xs = s.ys * mix.transpose() + 0.5 * glra::random::gaussian(samples, dim_f, rng);
  return s;
}

inline glra::GlraProblem two_branch() {
  glra::GlraProblem p;
  p.M = Matrix::Identity(2, 2);
  p.B.resize(2, 3);
  p.B << 1, 0, 0, 0, 0.5, 0;
  p.C = p.B.transpose();
  p.rank = 1;
  return p;
}

// X_c(alpha): the 2x2 block of X_c(0) bordered by the free entries alpha_1..alpha_5.
inline Matrix two_branch_member(const Matrix& x0, const Vector& alpha) {
  Matrix x = x0;
  x(0, 2) = alpha(0);
  x(1, 2) = alpha(1);
  x(2, 0) = alpha(2);
  x(2, 1) = alpha(3);
  x(2, 2) = alpha(4);
  return x;
}

}  // namespace support
