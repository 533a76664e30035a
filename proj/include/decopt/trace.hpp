#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace decopt {

/// One record per outer epoch (row 0 is the starting point). Counters are
/// cumulative and per agent.
struct TraceRow {
  int epoch = 0;
  std::uint64_t sfo = 0;
  std::uint64_t comm = 0;
  double objective = 0.0;  ///< F(ȳ)
  double subopt = std::numeric_limits<double>::quiet_NaN();
  double consensus = 0.0;  ///< ‖Y − 1ȳᵀ‖_F
  double wall_seconds = 0.0;
  std::int64_t inner_steps = 0;  ///< T + 1 for variance-reduced epochs, 0 otherwise
};

struct RunTrace {
  std::string solver;
  std::vector<TraceRow> rows;

  /// Fills subopt = objective − f_star on every row.
  void set_reference(double f_star);
  double best_objective() const;
  /// First row whose subopt is at or below `target`, or nullptr.
  const TraceRow* first_below(double target) const;
};

}  // namespace decopt
