#include <fmt/format.h>

#include "decopt/error.hpp"
#include "decopt/solvers.hpp"
#include "recorder.hpp"

namespace decopt {

AgentMatrix mirror_step(const AgentMatrix& q, const AgentMatrix& y_next, const AgentMatrix& x_next, double tau,
                        const GossipMatrix& w, int rounds) {
  if (!(tau > 0.0)) throw DomainError(fmt::format("mirror_step: tau = {} must be positive", tau));
  if (q.rows() != y_next.rows() || q.cols() != y_next.cols() || q.rows() != x_next.rows() ||
      q.cols() != x_next.cols())
    throw InvalidDimension("mirror_step: q, y and x must share a shape");
  const AgentMatrix step = (q + (0.5 * tau) * y_next - (x_next - y_next) / (2.0 * tau)) / (1.0 + 0.5 * tau);
  return fast_mix(step, w, rounds);
}

RunTrace run_pmgt_katyushax(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w) {
  return run_pmgt_katyushax(inst, cfg, w, Vector::Zero(inst.dim()));
}

RunTrace run_pmgt_katyushax(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w,
                            const Vector& x0) {
  cfg.validate(inst.per_agent());
  if (w.agents() != inst.agents())
    throw InvalidDimension(fmt::format("gossip matrix has {} agents, instance has {}", w.agents(), inst.agents()));
  if (!(inst.sigma() > 0.0)) throw DomainError("pmgt_katyushax: sigma = 0; apply regularize_epsilon first");
  if (x0.size() != inst.dim()) throw InvalidDimension("pmgt_katyushax: starting point has wrong dimension");

  const Index m = inst.agents();
  const auto n = static_cast<std::uint64_t>(inst.per_agent());
  const auto rounds = static_cast<std::uint64_t>(cfg.M);
  const double tau = cfg.tau;
  detail::TraceRecorder recorder("pmgt_katyushax", inst, cfg.stop_below);
  Counters counters;

  AgentMatrix x = replicate_rows(x0, m);
  AgentMatrix y = x;
  AgentMatrix q = x;
  // ∇F(x⁰) is not available locally; mixing the local gradients gives a
  // tracker whose network average is exactly ∇f(x⁰).
  AgentMatrix grad_prev = inst.local_full_grads(x);
  counters.sfo += n;
  AgentMatrix s_hat = fast_mix(grad_prev, w, cfg.M);
  counters.comm += rounds;
  recorder.record(0, counters, y, 0);

  for (int k = 0; k < cfg.K; ++k) {
    x = fast_mix(tau * q + (1.0 - tau) * y, w, cfg.M);
    counters.comm += rounds;

    AgentMatrix grad = inst.local_full_grads(x);
    counters.sfo += n;
    s_hat = fast_mix(s_hat + grad - grad_prev, w, cfg.M);
    counters.comm += rounds;
    grad_prev = std::move(grad);

    InnerEpochResult inner = svrg_inner_epoch(inst, x, s_hat, cfg, w, static_cast<std::uint64_t>(k), counters);
    y = std::move(inner.y);

    q = mirror_step(q, y, x, tau, w, cfg.M);
    counters.comm += rounds;

    if (!all_finite(y) || !all_finite(q))
      throw DomainError(fmt::format("pmgt_katyushax: iterate diverged at epoch {}", k + 1));
    if (recorder.record(k + 1, counters, y, inner.inner_steps)) break;
  }
  return std::move(recorder).finish();
}

}  // namespace decopt
