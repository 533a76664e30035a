#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "decopt/agent_matrix.hpp"
#include "decopt/gossip.hpp"
#include "decopt/problem.hpp"
#include "decopt/solver_config.hpp"
#include "decopt/trace.hpp"

namespace decopt {

/// Cumulative per-agent oracle and communication counts.
struct Counters {
  std::uint64_t sfo = 0;   ///< component-gradient evaluations
  std::uint64_t comm = 0;  ///< gossip rounds
};

/// Inner-loop state of one decentralized SVRG epoch.
struct EpochState {
  AgentMatrix w;   ///< current iterate
  AgentMatrix s;   ///< gradient tracker
  AgentMatrix v;   ///< variance-reduced estimator
  AgentMatrix mu;  ///< per-agent anchor gradients
  AgentMatrix w0;  ///< epoch anchor
};

/// Called once per inner step t after the tracker update and before the
/// iterate update, i.e. with s = sᵗ, v = vᵗ and w = wᵗ.
using InnerObserver = std::function<void(std::int64_t t, const EpochState&)>;

/// Row i: μ_i + (1/b) Σ_{j ∈ batches[i]} (∇f_{i,j}(w_i) − ∇f_{i,j}(w0_i)).
/// Adds 2b to counters.sfo.
AgentMatrix vr_estimator(const ProblemInstance& inst, const EpochState& state,
                         const std::vector<std::vector<Index>>& batches, Counters& counters);

struct InnerEpochResult {
  AgentMatrix y;                 ///< w^{T+1}
  std::int64_t inner_steps = 0;  ///< T + 1
};

/// One epoch of decentralized prox-SVRG with gradient tracking, anchored at
/// x_epoch with tracker s_hat. Randomness comes from streams derived from
/// (cfg.seed, epoch, t, agent).
InnerEpochResult svrg_inner_epoch(const ProblemInstance& inst, const AgentMatrix& x_epoch, const AgentMatrix& s_hat,
                                  const SolverConfig& cfg, const GossipMatrix& w, std::uint64_t epoch,
                                  Counters& counters, const InnerObserver& observer = {});

/// FastMix((q + τ·y/2 − (x − y)/(2τ)) / (1 + τ/2), M), the closed form of
///   argmin_q ½‖q − q_prev‖² + ⟨(x − y)/(2τ), q⟩ + (τ/4)‖q − y‖².
AgentMatrix mirror_step(const AgentMatrix& q, const AgentMatrix& y_next, const AgentMatrix& x_next, double tau,
                        const GossipMatrix& w, int rounds);

RunTrace run_pmgt_katyushax(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w);
RunTrace run_pmgt_katyushax(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w,
                            const Vector& x0);

RunTrace run_pmgt_svrg(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w);
RunTrace run_pmgt_svrg(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w,
                       const Vector& x0);

/// Prox-SVRG over all m·n components as a single shard. cfg.b and cfg.t0 are
/// interpreted against m·n.
RunTrace run_centralized_svrg(const ProblemInstance& inst, const SolverConfig& cfg);
RunTrace run_centralized_svrg(const ProblemInstance& inst, const SolverConfig& cfg, const Vector& x0);

struct BaselineConfig {
  double step = 0.0;
  int K = 1;
  std::optional<double> stop_below;
};

/// PG-EXTRA with mixing matrices W and (I + W)/2.
RunTrace run_pgextra(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w);
RunTrace run_pgextra(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w,
                     const Vector& x0);

/// NIDS with mixing matrix (I + W)/2.
RunTrace run_nids(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w);
RunTrace run_nids(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w, const Vector& x0);

}  // namespace decopt
