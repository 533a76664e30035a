#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "decopt/agent_matrix.hpp"

namespace decopt {

using Rng = std::mt19937_64;

/// T with P(T = k) = (1 − p)^k · p on k ∈ {0, 1, 2, ...}, so E[T] = (1 − p)/p.
/// Throws DomainError unless p ∈ (0, 1].
std::int64_t sample_geometric(double p, Rng& rng);

/// Independent stream keyed by (seed, epoch, step, agent). Solvers draw every
/// random quantity from a stream derived this way, so results do not depend on
/// evaluation order.
Rng derive_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t step, std::uint64_t agent);

/// Stream used for the inner-loop length of `epoch`.
Rng epoch_length_stream(std::uint64_t seed, std::uint64_t epoch);

/// Fills `out` with `count` indices drawn uniformly from [0, n) with replacement.
void sample_batch(Rng& rng, Index n, Index count, std::vector<Index>& out);

}  // namespace decopt
