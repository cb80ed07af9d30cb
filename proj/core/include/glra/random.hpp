#pragma once

#include "glra/linalg.hpp"

#include <cstdint>
#include <random>

namespace glra::random {

using Engine = std::mt19937_64;

/// Seeds derived from (seed, stream) are decorrelated so that restarts and trials
/// can be evaluated in any order.
Engine engine(std::uint64_t seed, std::uint64_t stream = 0);

Matrix gaussian(Index rows, Index cols, Engine& rng);

/// Product of two Gaussian factors, so rank <= rank (exactly rank with probability one).
Matrix low_rank(Index rows, Index cols, Index rank, Engine& rng);

/// Matrix with orthonormal columns spanning a uniformly random subspace.
Matrix orthonormal(Index rows, Index cols, Engine& rng);

Index uniform_index(Index lo, Index hi, Engine& rng);

}  // namespace glra::random
