#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decopt/gossip.hpp"
#include "decopt/problem.hpp"
#include "decopt/solver_config.hpp"
#include "decopt/trace.hpp"

namespace decopt {

struct DatasetSpec {
  enum class Kind { bernoulli, libsvm };
  Kind kind = Kind::bernoulli;
  // bernoulli
  Index rows = 2048;
  Index cols = 20;
  std::uint64_t seed = 0;
  // libsvm
  std::filesystem::path path;
  std::optional<Index> max_rows;
  std::optional<Index> d_cap;
  std::optional<std::filesystem::path> cache;
};

struct ProblemSpec {
  DatasetSpec dataset;
  Index m = 8;
  double r = 2.0;
  RegularizerSpec regularizer;
  std::optional<double> eps_f;
  std::optional<std::uint64_t> linear_seed;  ///< defaults to the experiment seed
};

struct GossipSpec {
  enum class Kind { lazy_ring, random_two_neighbor };
  Kind kind = Kind::random_two_neighbor;
  double laziness = 0.5;
  std::uint64_t seed = 0;
};

/// Per-solver overrides. Unset fields fall back to the experiment defaults and
/// the hyperparameter rules.
struct SolverSpec {
  std::string name;
  std::optional<double> eta;
  double eta_scale = 1.0;
  std::optional<Index> b;
  std::optional<double> tau;
  std::optional<int> M;
  std::optional<int> K;
  std::optional<double> step;  ///< baselines; default 1/(2·local_smoothness)
  double step_scale = 1.0;
  std::optional<double> stop_below;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<SolverSpec> solvers;
  GossipSpec gossip;
  double rho_target = 0.1;
  int K = 100;
  double comm_weight = 1.0;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
  std::optional<double> stop_below;
};

/// Names accepted in ExperimentConfig::solvers.
const std::vector<std::string>& known_solvers();

/// Parses and validates a JSON document mirroring ExperimentConfig.
/// Throws ConfigError on unknown keys' values, unknown solvers or bad ranges.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

DataMatrix build_dataset(const DatasetSpec& spec, Index m);
ProblemInstance build_instance(const ExperimentConfig& cfg);
GossipMatrix build_gossip(const GossipSpec& spec, Index m);

/// max_i ‖∇²f_i‖ for quadratic shards, max(ℓ₁, ℓ₂) otherwise. The
/// deterministic baselines step on each f_i, so their step has to respect the
/// local curvature rather than the global L.
double local_smoothness(const ProblemInstance& inst);

/// CSV record: cost = sfo + comm_weight·comm.
struct RecordRow {
  std::string solver;
  int epoch = 0;
  std::uint64_t sfo_per_agent = 0;
  std::uint64_t comm_rounds = 0;
  double cost = 0.0;
  double suboptimality = 0.0;
  double consensus_error = 0.0;
};

std::vector<RecordRow> to_records(const RunTrace& trace, double comm_weight);

inline constexpr const char* kCsvHeader = "solver,epoch,sfo,comm,cost,subopt,consensus";

/// Writes kCsvHeader and one line per row; floats use 17 significant digits.
void emit_csv(const std::vector<RecordRow>& rows, const std::filesystem::path& path);
void emit_csv(const RunTrace& trace, double comm_weight, const std::filesystem::path& path);
std::vector<RecordRow> read_csv(const std::filesystem::path& path);

struct SolverOutcome {
  SolverSpec spec;
  RunTrace trace;
  nlohmann::json hyperparameters;
};

struct ExperimentResult {
  std::vector<SolverOutcome> runs;
  double f_star = 0.0;
  bool f_star_closed_form = false;
  nlohmann::json manifest;
};

/// Instance/gossip summary: L, ℓ₁, ℓ₂, σ, λ₂(W), κ and the eigen data of A.
nlohmann::json describe_setup(const ProblemInstance& inst, const GossipMatrix& gossip, const ExperimentConfig& cfg);

/// Builds data, instance and gossip matrix, runs every solver, fixes the
/// reference optimum and, when write_files is set, writes <output>/<solver>.csv
/// and <output>/manifest.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace decopt
