#pragma once

#include <cstdint>

#include "decopt/agent_matrix.hpp"

namespace decopt {

/// Symmetric doubly stochastic mixing matrix with 0 ≼ W ≼ I and
/// null(I − W) = span(1). Instances can only be obtained through
/// from_weights() or the builders below, so every live object is valid.
class GossipMatrix {
 public:
  /// Validates `weights` and caches its second-largest eigenvalue.
  /// Throws InvariantViolation if any invariant fails.
  static GossipMatrix from_weights(Matrix weights);

  const Matrix& weights() const { return weights_; }
  double lambda2() const { return lambda2_; }
  Index agents() const { return weights_.rows(); }

 private:
  GossipMatrix(Matrix w, double lambda2) : weights_(std::move(w)), lambda2_(lambda2) {}

  Matrix weights_;
  double lambda2_;
};

/// laziness·I + (1 − laziness)/2 · (P + Pᵀ) with P the cyclic shift.
/// Positive semidefiniteness requires laziness ≥ 1/2 when m ≥ 3.
GossipMatrix build_lazy_ring(Index m, double laziness);

/// Ring united with a random Hamiltonian cycle (so each agent gets two random
/// neighbours), Metropolis–Hastings weights, then W ← (I + W)/2.
GossipMatrix build_random_two_neighbor(Index m, std::uint64_t seed);

/// Second-largest eigenvalue of a symmetric matrix, clamped below at 0.
/// Returns 0 for a 1×1 matrix.
double second_eigenvalue(const Matrix& weights);
inline double second_eigenvalue(const GossipMatrix& w) { return w.lambda2(); }

/// Accelerated multi-round gossip: x⁻¹ = x⁰ = X and
///   x^{k+1} = (1 + η) W x^k − η x^{k−1},  η = 1/(1 + √(1 − λ₂²)),
/// applied `rounds` times. rounds = 0 returns X.
AgentMatrix fast_mix(const AgentMatrix& x, const GossipMatrix& w, int rounds);

/// ρ = √14 · (1 − (1 − 1/√2)·√(1 − λ₂))^rounds
double contraction_bound(double lambda2, int rounds);

/// Smallest M with contraction_bound(lambda2, M) ≤ rho_target.
int min_rounds_for_rho(double lambda2, double rho_target);

}  // namespace decopt
