#pragma once

#include <cstdint>
#include <optional>

#include "decopt/agent_matrix.hpp"

namespace decopt {

class ProblemInstance;

/// Hyperparameters of the variance-reduced solvers. t0 and alpha are derived
/// from (eta, tau, b) and the per-agent component count n; build instances with
/// make() so they stay consistent.
struct SolverConfig {
  double eta = 0.0;   ///< inner step size
  double tau = 0.5;   ///< momentum, in (0, 1]
  Index b = 1;        ///< minibatch size, in [1, n]
  int M = 0;          ///< gossip rounds per FastMix call
  int K = 1;          ///< outer epochs
  std::uint64_t seed = 0;
  Index t0 = 1;       ///< ⌈n/b⌉
  double alpha = 0.0; ///< t0·eta/(2·tau)

  /// Stop after the first epoch whose suboptimality is at or below this value.
  /// Only honoured when a reference optimum is known.
  std::optional<double> stop_below;

  static SolverConfig make(Index n, double eta, double tau, Index b, int M, int K, std::uint64_t seed);

  /// Throws DomainError when a field is out of range or t0/alpha are stale.
  void validate(Index n) const;
};

/// Inputs to default_hyperparams(); any field left empty is filled by the
/// theory-driven rule.
struct HyperparamRequest {
  std::optional<Index> b;
  std::optional<double> eta;
  std::optional<double> tau;
  std::optional<int> M;
  double eta_scale = 1.0;  ///< multiplies the rule-derived eta (ignored when eta is given)
  double rho_target = 0.1;
  int K = 100;
  std::uint64_t seed = 0;
};

/// b = round(√n) clamped to [1, n]; t0 = ⌈n/b⌉;
/// η = min(1/(2L), √(b/(ℓ₁ℓ₂t0))/8); τ = min(1/2, √(t0ησ)/2);
/// M = min_rounds_for_rho(λ₂, rho_target).
SolverConfig default_hyperparams(const ProblemInstance& inst, double lambda2, const HyperparamRequest& request = {});

}  // namespace decopt
