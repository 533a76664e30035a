#include "decopt/trace.hpp"

#include <algorithm>

namespace decopt {

void RunTrace::set_reference(double f_star) {
  for (auto& row : rows) row.subopt = row.objective - f_star;
}

double RunTrace::best_objective() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) best = std::min(best, row.objective);
  return best;
}

const TraceRow* RunTrace::first_below(double target) const {
  for (const auto& row : rows)
    if (row.subopt <= target) return &row;
  return nullptr;
}

}  // namespace decopt
