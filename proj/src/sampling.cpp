#include "decopt/sampling.hpp"

#include <limits>

#include <fmt/format.h>

#include "decopt/error.hpp"

namespace decopt {
namespace {

constexpr std::uint64_t kLengthStep = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kLengthAgent = std::numeric_limits<std::uint64_t>::max();

}  // namespace

std::int64_t sample_geometric(double p, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError(fmt::format("geometric: p = {} outside (0, 1]", p));
  if (p == 1.0) return 0;
  std::geometric_distribution<std::int64_t> dist(p);
  return dist(rng);
}

Rng derive_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t step, std::uint64_t agent) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(epoch), hi(epoch), lo(step), hi(step), lo(agent), hi(agent)};
  return Rng(seq);
}

Rng epoch_length_stream(std::uint64_t seed, std::uint64_t epoch) {
  return derive_stream(seed, epoch, kLengthStep, kLengthAgent);
}

void sample_batch(Rng& rng, Index n, Index count, std::vector<Index>& out) {
  if (n < 1 || count < 0) throw InvalidDimension("sample_batch: need n >= 1 and count >= 0");
  std::uniform_int_distribution<Index> pick(0, n - 1);
  out.resize(static_cast<std::size_t>(count));
  for (auto& idx : out) idx = pick(rng);
}

}  // namespace decopt
