#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "decopt/problem.hpp"
#include "decopt/solvers.hpp"
#include "decopt/trace.hpp"

namespace decopt::detail {

/// Appends trace rows evaluated at the network average of an agent stack.
class TraceRecorder {
 public:
  TraceRecorder(std::string solver, const ProblemInstance& inst, std::optional<double> stop_below)
      : inst_(inst), reference_(closed_form_optimum(inst)), stop_below_(stop_below),
        start_(std::chrono::steady_clock::now()) {
    trace_.solver = std::move(solver);
  }

  /// Returns true when the early-stop threshold has been reached.
  bool record(int epoch, const Counters& counters, const AgentMatrix& y, std::int64_t inner_steps) {
    return push(epoch, counters, row_mean(y), consensus_error(y), inner_steps);
  }

  bool record_point(int epoch, const Counters& counters, const Vector& y, std::int64_t inner_steps) {
    return push(epoch, counters, y, 0.0, inner_steps);
  }

  RunTrace finish() && { return std::move(trace_); }

 private:
  bool push(int epoch, const Counters& counters, const Vector& mean, double consensus, std::int64_t inner_steps) {
    TraceRow row;
    row.epoch = epoch;
    row.sfo = counters.sfo;
    row.comm = counters.comm;
    row.objective = inst_.objective_value(mean);
    if (reference_) row.subopt = row.objective - *reference_;
    row.consensus = consensus;
    row.inner_steps = inner_steps;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    trace_.rows.push_back(row);
    return stop_below_ && reference_ && row.subopt <= *stop_below_;
  }

  const ProblemInstance& inst_;
  std::optional<double> reference_;
  std::optional<double> stop_below_;
  std::chrono::steady_clock::time_point start_;
  RunTrace trace_;
};

}  // namespace decopt::detail
