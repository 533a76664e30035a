#include <fmt/format.h>

#include "decopt/error.hpp"
#include "decopt/regularizer.hpp"
#include "decopt/sampling.hpp"
#include "decopt/solvers.hpp"
#include "recorder.hpp"

namespace decopt {
namespace {

void require_stack(const ProblemInstance& inst, const AgentMatrix& x, const char* what) {
  if (x.rows() != inst.agents() || x.cols() != inst.dim())
    throw InvalidDimension(
        fmt::format("{}: expected {}x{} stack, got {}x{}", what, inst.agents(), inst.dim(), x.rows(), x.cols()));
}

void require_gossip(const ProblemInstance& inst, const GossipMatrix& w) {
  if (w.agents() != inst.agents())
    throw InvalidDimension(fmt::format("gossip matrix has {} agents, instance has {}", w.agents(), inst.agents()));
}

void require_strongly_convex(const ProblemInstance& inst, const char* solver) {
  if (!(inst.sigma() > 0.0))
    throw DomainError(fmt::format("{}: sigma = 0; apply regularize_epsilon first", solver));
}

}  // namespace

AgentMatrix vr_estimator(const ProblemInstance& inst, const EpochState& state,
                         const std::vector<std::vector<Index>>& batches, Counters& counters) {
  const Index m = inst.agents();
  const Index n = inst.per_agent();
  const Index d = inst.dim();
  require_stack(inst, state.w, "vr_estimator");
  require_stack(inst, state.w0, "vr_estimator");
  require_stack(inst, state.mu, "vr_estimator");
  if (static_cast<Index>(batches.size()) != m)
    throw InvalidDimension(fmt::format("vr_estimator: {} batches for {} agents", batches.size(), m));

  const auto& model = inst.model();
  AgentMatrix out(m, d);
  Vector wi(d), w0i(d), g(d), g0(d), diff(d);
  std::size_t batch_size = batches.empty() ? 0 : batches.front().size();
  for (Index i = 0; i < m; ++i) {
    const auto& batch = batches[static_cast<std::size_t>(i)];
    if (batch.empty() || batch.size() != batch_size)
      throw InvalidDimension("vr_estimator: batches must be non-empty and of equal size");
    wi = state.w.row(i).transpose();
    w0i = state.w0.row(i).transpose();
    diff.setZero();
    for (Index j : batch) {
      if (j < 0 || j >= n) throw InvalidDimension(fmt::format("vr_estimator: index {} outside [0, {})", j, n));
      g.setZero();
      g0.setZero();
      model.add_component_grad(i, j, wi, 1.0, g);
      model.add_component_grad(i, j, w0i, 1.0, g0);
      diff += g - g0;
    }
    out.row(i) = state.mu.row(i) + (diff / static_cast<double>(batch.size())).transpose();
  }
  counters.sfo += 2 * batch_size;
  return out;
}

InnerEpochResult svrg_inner_epoch(const ProblemInstance& inst, const AgentMatrix& x_epoch, const AgentMatrix& s_hat,
                                  const SolverConfig& cfg, const GossipMatrix& w, std::uint64_t epoch,
                                  Counters& counters, const InnerObserver& observer) {
  const Index m = inst.agents();
  const Index n = inst.per_agent();
  cfg.validate(n);
  require_stack(inst, x_epoch, "svrg_inner_epoch");
  require_stack(inst, s_hat, "svrg_inner_epoch");
  require_gossip(inst, w);

  EpochState st{x_epoch, s_hat, s_hat, s_hat, x_epoch};

  Rng length_rng = epoch_length_stream(cfg.seed, epoch);
  const std::int64_t last = sample_geometric(1.0 / static_cast<double>(cfg.t0), length_rng);

  std::vector<std::vector<Index>> batches(static_cast<std::size_t>(m));
  for (std::int64_t t = 0; t <= last; ++t) {
    for (Index i = 0; i < m; ++i) {
      Rng rng = derive_stream(cfg.seed, epoch, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
      sample_batch(rng, n, cfg.b, batches[static_cast<std::size_t>(i)]);
    }
    AgentMatrix v = vr_estimator(inst, st, batches, counters);

    st.s = fast_mix(st.s + v - st.v, w, cfg.M);
    counters.comm += static_cast<std::uint64_t>(cfg.M);
    st.v = std::move(v);
    if (observer) observer(t, st);

    st.w = fast_mix(prox_rows(cfg.eta, inst.regularizer(), st.w - cfg.eta * st.s), w, cfg.M);
    counters.comm += static_cast<std::uint64_t>(cfg.M);
  }
  return {std::move(st.w), last + 1};
}

RunTrace run_pmgt_svrg(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w) {
  return run_pmgt_svrg(inst, cfg, w, Vector::Zero(inst.dim()));
}

RunTrace run_pmgt_svrg(const ProblemInstance& inst, const SolverConfig& cfg, const GossipMatrix& w,
                       const Vector& x0) {
  cfg.validate(inst.per_agent());
  require_gossip(inst, w);
  require_strongly_convex(inst, "pmgt_svrg");
  if (x0.size() != inst.dim()) throw InvalidDimension("pmgt_svrg: starting point has wrong dimension");

  const Index m = inst.agents();
  const auto n = static_cast<std::uint64_t>(inst.per_agent());
  detail::TraceRecorder recorder("pmgt_svrg", inst, cfg.stop_below);
  Counters counters;

  AgentMatrix y = replicate_rows(x0, m);
  // The tracker starts from the (unmixed) local gradients at y⁰ = y⁻¹, so the
  // first tracking update reduces to FastMix(∇f_i(y⁰)) and every epoch costs
  // exactly one local full gradient.
  AgentMatrix s_hat = AgentMatrix::Zero(m, inst.dim());
  AgentMatrix grad_prev = AgentMatrix::Zero(m, inst.dim());
  recorder.record(0, counters, y, 0);

  for (int k = 0; k < cfg.K; ++k) {
    AgentMatrix grad = inst.local_full_grads(y);
    counters.sfo += n;
    s_hat = fast_mix(s_hat + grad - grad_prev, w, cfg.M);
    counters.comm += static_cast<std::uint64_t>(cfg.M);
    grad_prev = std::move(grad);

    InnerEpochResult inner = svrg_inner_epoch(inst, y, s_hat, cfg, w, static_cast<std::uint64_t>(k), counters);
    y = std::move(inner.y);
    if (!all_finite(y)) throw DomainError(fmt::format("pmgt_svrg: iterate diverged at epoch {}", k + 1));
    if (recorder.record(k + 1, counters, y, inner.inner_steps)) break;
  }
  return std::move(recorder).finish();
}

RunTrace run_centralized_svrg(const ProblemInstance& inst, const SolverConfig& cfg) {
  return run_centralized_svrg(inst, cfg, Vector::Zero(inst.dim()));
}

RunTrace run_centralized_svrg(const ProblemInstance& inst, const SolverConfig& cfg, const Vector& x0) {
  const Index n = inst.per_agent();
  const Index total = inst.agents() * n;
  cfg.validate(total);
  require_strongly_convex(inst, "centralized_svrg");
  if (x0.size() != inst.dim()) throw InvalidDimension("centralized_svrg: starting point has wrong dimension");

  const Index d = inst.dim();
  const auto& model = inst.model();
  detail::TraceRecorder recorder("centralized_svrg", inst, cfg.stop_below);
  Counters counters;

  Vector y = x0;
  recorder.record_point(0, counters, y, 0);

  std::vector<Index> batch;
  Vector mu(d), w(d), g(d), g0(d), diff(d), v(d);
  for (int k = 0; k < cfg.K; ++k) {
    const auto epoch = static_cast<std::uint64_t>(k);
    model.grad(y, mu);
    counters.sfo += static_cast<std::uint64_t>(total);

    w = y;
    const Vector& w0 = y;
    Rng length_rng = epoch_length_stream(cfg.seed, epoch);
    const std::int64_t last = sample_geometric(1.0 / static_cast<double>(cfg.t0), length_rng);
    for (std::int64_t t = 0; t <= last; ++t) {
      Rng rng = derive_stream(cfg.seed, epoch, static_cast<std::uint64_t>(t), 0);
      sample_batch(rng, total, cfg.b, batch);
      diff.setZero();
      for (Index flat : batch) {
        g.setZero();
        g0.setZero();
        model.add_component_grad(flat / n, flat % n, w, 1.0, g);
        model.add_component_grad(flat / n, flat % n, w0, 1.0, g0);
        diff += g - g0;
      }
      v = mu + diff / static_cast<double>(cfg.b);
      counters.sfo += 2 * static_cast<std::uint64_t>(cfg.b);
      w = prox(cfg.eta, inst.regularizer(), w - cfg.eta * v);
    }
    y = w;
    if (!y.allFinite()) throw DomainError(fmt::format("centralized_svrg: iterate diverged at epoch {}", k + 1));
    if (recorder.record_point(k + 1, counters, y, last + 1)) break;
  }
  return std::move(recorder).finish();
}

}  // namespace decopt
