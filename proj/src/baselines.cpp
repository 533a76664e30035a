#include <fmt/format.h>

#include "decopt/error.hpp"
#include "decopt/regularizer.hpp"
#include "decopt/solvers.hpp"
#include "recorder.hpp"

namespace decopt {
namespace {

void check_baseline(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w,
                    const Vector& x0, const char* name) {
  if (!(cfg.step > 0.0)) throw DomainError(fmt::format("{}: step {} must be positive", name, cfg.step));
  if (cfg.K < 0) throw DomainError(fmt::format("{}: K must be >= 0", name));
  if (w.agents() != inst.agents())
    throw InvalidDimension(fmt::format("gossip matrix has {} agents, instance has {}", w.agents(), inst.agents()));
  if (x0.size() != inst.dim()) throw InvalidDimension(fmt::format("{}: starting point has wrong dimension", name));
}

}  // namespace

RunTrace run_pgextra(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w) {
  return run_pgextra(inst, cfg, w, Vector::Zero(inst.dim()));
}

// x^{1/2} = W x⁰ − α∇f(x⁰)
// x^{k+1+1/2} = W x^{k+1} + x^{k+1/2} − W̃ x^k − α(∇f(x^{k+1}) − ∇f(x^k)),  W̃ = (I + W)/2
// x^{k+1} = prox_{α,ψ}(x^{k+1/2})
RunTrace run_pgextra(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w,
                     const Vector& x0) {
  check_baseline(inst, cfg, w, x0, "pgextra");
  const double alpha = cfg.step;
  const auto n = static_cast<std::uint64_t>(inst.per_agent());
  const Matrix& mix = w.weights();
  detail::TraceRecorder recorder("pgextra", inst, cfg.stop_below);
  Counters counters;

  AgentMatrix x_prev = replicate_rows(x0, inst.agents());
  recorder.record(0, counters, x_prev, 0);
  if (cfg.K == 0) return std::move(recorder).finish();

  AgentMatrix grad_prev = inst.local_full_grads(x_prev);
  AgentMatrix mixed_prev = mix * x_prev;
  AgentMatrix half = mixed_prev - alpha * grad_prev;
  AgentMatrix x = prox_rows(alpha, inst.regularizer(), half);
  counters.sfo += n;
  counters.comm += 1;
  if (recorder.record(1, counters, x, 0)) return std::move(recorder).finish();

  for (int k = 2; k <= cfg.K; ++k) {
    AgentMatrix grad = inst.local_full_grads(x);
    AgentMatrix mixed = mix * x;
    half = mixed + half - 0.5 * (x_prev + mixed_prev) - alpha * (grad - grad_prev);
    x_prev = std::move(x);
    mixed_prev = std::move(mixed);
    grad_prev = std::move(grad);
    x = prox_rows(alpha, inst.regularizer(), half);
    counters.sfo += n;
    counters.comm += 1;
    if (!all_finite(x)) throw DomainError(fmt::format("pgextra: iterate diverged at iteration {}", k));
    if (recorder.record(k, counters, x, 0)) break;
  }
  return std::move(recorder).finish();
}

RunTrace run_nids(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w) {
  return run_nids(inst, cfg, w, Vector::Zero(inst.dim()));
}

// z¹ = x⁰ − α∇f(x⁰)
// z^{k+1} = z^k − x^k + W̃(2x^k − x^{k−1} − α∇f(x^k) + α∇f(x^{k−1})),  W̃ = (I + W)/2
// x^{k+1} = prox_{α,ψ}(z^{k+1})
RunTrace run_nids(const ProblemInstance& inst, const BaselineConfig& cfg, const GossipMatrix& w, const Vector& x0) {
  check_baseline(inst, cfg, w, x0, "nids");
  const double alpha = cfg.step;
  const auto n = static_cast<std::uint64_t>(inst.per_agent());
  const Index m = inst.agents();
  const Matrix half_mix = 0.5 * (Matrix::Identity(m, m) + w.weights());
  detail::TraceRecorder recorder("nids", inst, cfg.stop_below);
  Counters counters;

  AgentMatrix x_prev = replicate_rows(x0, m);
  recorder.record(0, counters, x_prev, 0);
  if (cfg.K == 0) return std::move(recorder).finish();

  // The first step is a purely local prox-gradient step.
  AgentMatrix grad_prev = inst.local_full_grads(x_prev);
  AgentMatrix z = x_prev - alpha * grad_prev;
  AgentMatrix x = prox_rows(alpha, inst.regularizer(), z);
  counters.sfo += n;
  if (recorder.record(1, counters, x, 0)) return std::move(recorder).finish();

  for (int k = 2; k <= cfg.K; ++k) {
    AgentMatrix grad = inst.local_full_grads(x);
    AgentMatrix inner = 2.0 * x - x_prev - alpha * (grad - grad_prev);
    z = z - x + half_mix * inner;
    x_prev = std::move(x);
    grad_prev = std::move(grad);
    x = prox_rows(alpha, inst.regularizer(), z);
    counters.sfo += n;
    counters.comm += 1;
    if (!all_finite(x)) throw DomainError(fmt::format("nids: iterate diverged at iteration {}", k));
    if (recorder.record(k, counters, x, 0)) break;
  }
  return std::move(recorder).finish();
}

}  // namespace decopt
