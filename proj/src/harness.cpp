#include "decopt/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <Eigen/Eigenvalues>

#include "decopt/error.hpp"
#include "decopt/solvers.hpp"

namespace decopt {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

template <class T>
void read_opt(const json& obj, const char* key, const std::string& where, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = get_as<T>(obj, key, where);
}

template <class T>
void read_or(const json& obj, const char* key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

DatasetSpec parse_dataset(const json& j) {
  const std::string where = "problem.dataset";
  if (!j.is_object() || !j.contains("kind")) throw ConfigError(where + ": missing 'kind'");
  DatasetSpec spec;
  const auto kind = get_as<std::string>(j, "kind", where);
  if (kind == "bernoulli") {
    reject_unknown(j, where, {"kind", "rows", "cols", "seed"});
    spec.kind = DatasetSpec::Kind::bernoulli;
    read_or(j, "rows", where, spec.rows);
    read_or(j, "cols", where, spec.cols);
    read_or(j, "seed", where, spec.seed);
    if (spec.rows < 1 || spec.cols < 1) throw ConfigError(where + ": rows and cols must be >= 1");
  } else if (kind == "libsvm") {
    reject_unknown(j, where, {"kind", "path", "max_rows", "d_cap", "cache"});
    spec.kind = DatasetSpec::Kind::libsvm;
    spec.path = get_as<std::string>(j, "path", where);
    read_opt(j, "max_rows", where, spec.max_rows);
    read_opt(j, "d_cap", where, spec.d_cap);
    std::optional<std::string> cache;
    read_opt(j, "cache", where, cache);
    if (cache) spec.cache = *cache;
  } else {
    throw ConfigError(fmt::format("{}: unknown kind '{}'", where, kind));
  }
  return spec;
}

RegularizerSpec parse_regularizer(const json& j) {
  const std::string where = "problem.regularizer";
  if (j.is_null()) return RegularizerSpec::none();
  reject_unknown(j, where, {"kind", "l1", "l2"});
  const auto kind = get_as<std::string>(j, "kind", where);
  double l1 = 0.0, l2 = 0.0;
  read_or(j, "l1", where, l1);
  read_or(j, "l2", where, l2);
  try {
    if (kind == "none") return RegularizerSpec::none();
    if (kind == "l1") return RegularizerSpec::l1(l1);
    if (kind == "squared_l2") return RegularizerSpec::squared_l2(l2);
    if (kind == "l1_plus_squared_l2") return RegularizerSpec::l1_plus_squared_l2(l1, l2);
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
  throw ConfigError(fmt::format("{}: unknown kind '{}'", where, kind));
}

GossipSpec parse_gossip(const json& j) {
  const std::string where = "gossip";
  GossipSpec spec;
  const auto kind = get_as<std::string>(j, "kind", where);
  if (kind == "lazy_ring") {
    reject_unknown(j, where, {"kind", "laziness"});
    spec.kind = GossipSpec::Kind::lazy_ring;
    read_or(j, "laziness", where, spec.laziness);
  } else if (kind == "random_two_neighbor") {
    reject_unknown(j, where, {"kind", "seed"});
    spec.kind = GossipSpec::Kind::random_two_neighbor;
    read_or(j, "seed", where, spec.seed);
  } else {
    throw ConfigError(fmt::format("{}: unknown kind '{}'", where, kind));
  }
  return spec;
}

SolverSpec parse_solver(const json& j, std::size_t index) {
  const std::string where = fmt::format("solvers[{}]", index);
  SolverSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
  } else {
    reject_unknown(j, where,
                   {"name", "eta", "eta_scale", "b", "tau", "M", "K", "step", "step_scale", "stop_below"});
    spec.name = get_as<std::string>(j, "name", where);
    read_opt(j, "eta", where, spec.eta);
    read_or(j, "eta_scale", where, spec.eta_scale);
    read_opt(j, "b", where, spec.b);
    read_opt(j, "tau", where, spec.tau);
    read_opt(j, "M", where, spec.M);
    read_opt(j, "K", where, spec.K);
    read_opt(j, "step", where, spec.step);
    read_or(j, "step_scale", where, spec.step_scale);
    read_opt(j, "stop_below", where, spec.stop_below);
  }
  const auto& names = known_solvers();
  if (std::find(names.begin(), names.end(), spec.name) == names.end())
    throw ConfigError(fmt::format("{}: unknown solver '{}'", where, spec.name));
  if (!(spec.eta_scale > 0.0) || !(spec.step_scale > 0.0))
    throw ConfigError(fmt::format("{}: eta_scale and step_scale must be > 0", where));
  if (spec.K && *spec.K < 0) throw ConfigError(fmt::format("{}: K must be >= 0", where));
  return spec;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

double parse_double(std::string_view field, const std::string& source, long line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(source, line, fmt::format("bad number '{}'", field));
  return v;
}

template <class T>
T parse_integer(std::string_view field, const std::string& source, long line) {
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(source, line, fmt::format("bad integer '{}'", field));
  return v;
}

/// Centralized SVRG treats all m·n components as one shard.
SolverConfig centralized_config(const ProblemInstance& inst, const SolverSpec& spec, int K, std::uint64_t seed) {
  const auto& c = inst.constants();
  const Index total = inst.agents() * inst.per_agent();
  const Index b = spec.b ? *spec.b : std::clamp<Index>(std::llround(std::sqrt(static_cast<double>(total))), 1, total);
  if (b < 1 || b > total) throw ConfigError(fmt::format("centralized_svrg: b = {} outside [1, {}]", b, total));
  const Index t0 = (total + b - 1) / b;
  const double eta =
      spec.eta ? *spec.eta
               : spec.eta_scale * std::min(1.0 / (2.0 * c.L), std::sqrt(static_cast<double>(b) /
                                                                        (c.ell1 * c.ell2 * static_cast<double>(t0))) /
                                                                  8.0);
  const double tau =
      spec.tau ? *spec.tau : std::min(0.5, std::sqrt(static_cast<double>(t0) * eta * inst.sigma()) / 2.0);
  return SolverConfig::make(total, eta, tau, b, 0, K, seed);
}

json solver_config_json(const SolverConfig& c) {
  return json{{"eta", c.eta}, {"tau", c.tau}, {"b", c.b},         {"M", c.M},
              {"K", c.K},     {"t0", c.t0},   {"alpha", c.alpha}, {"seed", c.seed}};
}

SolverOutcome run_one(const ProblemInstance& inst, const GossipMatrix& gossip, const ExperimentConfig& cfg,
                      const SolverSpec& spec) {
  SolverOutcome out;
  out.spec = spec;
  const int K = spec.K ? *spec.K : cfg.K;
  const auto stop = spec.stop_below ? spec.stop_below : cfg.stop_below;

  if (spec.name == "pgextra" || spec.name == "nids") {
    BaselineConfig bc;
    bc.step = spec.step ? *spec.step : spec.step_scale / (2.0 * local_smoothness(inst));
    bc.K = K;
    bc.stop_below = stop;
    out.hyperparameters = json{{"step", bc.step}, {"K", bc.K}};
    out.trace = spec.name == "pgextra" ? run_pgextra(inst, bc, gossip) : run_nids(inst, bc, gossip);
    return out;
  }

  if (!(inst.sigma() > 0.0) && !spec.tau)
    throw ConfigError(fmt::format("{}: sigma = 0; set problem.eps_f", spec.name));

  SolverConfig sc;
  if (spec.name == "centralized_svrg") {
    sc = centralized_config(inst, spec, K, cfg.seed);
  } else {
    HyperparamRequest req;
    req.b = spec.b;
    req.eta = spec.eta;
    req.tau = spec.tau;
    req.M = spec.M;
    req.eta_scale = spec.eta_scale;
    req.rho_target = cfg.rho_target;
    req.K = K;
    req.seed = cfg.seed;
    sc = default_hyperparams(inst, gossip.lambda2(), req);
  }
  sc.stop_below = stop;
  out.hyperparameters = solver_config_json(sc);
  if (spec.name == "pmgt_katyushax") {
    out.trace = run_pmgt_katyushax(inst, sc, gossip);
  } else if (spec.name == "pmgt_svrg") {
    out.trace = run_pmgt_svrg(inst, sc, gossip);
  } else {
    out.trace = run_centralized_svrg(inst, sc);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names{"pmgt_katyushax", "pmgt_svrg", "pgextra", "nids", "centralized_svrg"};
  return names;
}

double local_smoothness(const ProblemInstance& inst) {
  const auto* q = inst.quadratic();
  if (!q) return std::max(inst.constants().ell1, inst.constants().ell2);
  double worst = 0.0;
  for (Index i = 0; i < inst.agents(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q->local_hessian(i), Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

ExperimentConfig parse_experiment_config(const json& doc) {
  reject_unknown(doc, "config",
                 {"problem", "solvers", "gossip", "rho_target", "K", "comm_weight", "output", "seed", "stop_below"});
  ExperimentConfig cfg;

  const json& p = doc.contains("problem") ? doc.at("problem") : throw ConfigError("config: missing 'problem'");
  reject_unknown(p, "problem", {"dataset", "m", "r", "regularizer", "eps_f", "linear_seed"});
  if (!p.contains("dataset")) throw ConfigError("problem: missing 'dataset'");
  cfg.problem.dataset = parse_dataset(p.at("dataset"));
  read_or(p, "m", "problem", cfg.problem.m);
  read_or(p, "r", "problem", cfg.problem.r);
  if (p.contains("regularizer")) cfg.problem.regularizer = parse_regularizer(p.at("regularizer"));
  read_opt(p, "eps_f", "problem", cfg.problem.eps_f);
  read_opt(p, "linear_seed", "problem", cfg.problem.linear_seed);
  if (cfg.problem.m < 1) throw ConfigError("problem.m must be >= 1");
  if (!(cfg.problem.r > 0.0)) throw ConfigError("problem.r must be > 0");
  if (cfg.problem.eps_f && !(*cfg.problem.eps_f > 0.0)) throw ConfigError("problem.eps_f must be > 0");

  if (!doc.contains("solvers") || !doc.at("solvers").is_array() || doc.at("solvers").empty())
    throw ConfigError("config: 'solvers' must be a non-empty array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.at("solvers").size(); ++i) {
    cfg.solvers.push_back(parse_solver(doc.at("solvers")[i], i));
    if (!seen.insert(cfg.solvers.back().name).second)
      throw ConfigError(fmt::format("solvers: '{}' listed twice", cfg.solvers.back().name));
  }

  if (doc.contains("gossip")) cfg.gossip = parse_gossip(doc.at("gossip"));
  read_or(doc, "rho_target", "config", cfg.rho_target);
  read_or(doc, "K", "config", cfg.K);
  read_or(doc, "comm_weight", "config", cfg.comm_weight);
  if (doc.contains("output")) cfg.output = get_as<std::string>(doc, "output", "config");
  read_or(doc, "seed", "config", cfg.seed);
  read_opt(doc, "stop_below", "config", cfg.stop_below);
  if (!(cfg.rho_target > 0.0)) throw ConfigError("rho_target must be > 0");
  if (cfg.K < 0) throw ConfigError("K must be >= 0");
  if (!(cfg.comm_weight >= 0.0)) throw ConfigError("comm_weight must be >= 0");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_experiment_config(doc);
}

DataMatrix build_dataset(const DatasetSpec& spec, Index m) {
  DataMatrix data;
  if (spec.kind == DatasetSpec::Kind::bernoulli) {
    data = gen_bernoulli_matrix(spec.rows, spec.cols, spec.seed);
  } else if (spec.cache && std::filesystem::exists(*spec.cache)) {
    spdlog::debug("loading data cache {}", spec.cache->string());
    data = load_data_cache(*spec.cache);
  } else {
    spdlog::info("parsing {}", spec.path.string());
    data = load_libsvm(spec.path, spec.max_rows, spec.d_cap);
    if (spec.cache) save_data_cache(data, *spec.cache);
  }
  const Index usable = data.rows() - data.rows() % m;
  if (usable < m) throw ConfigError(fmt::format("dataset has {} rows, fewer than m = {}", data.rows(), m));
  if (usable != data.rows()) spdlog::info("dropping {} trailing rows to shard over {} agents", data.rows() - usable, m);
  return usable == data.rows() ? data : data.head(usable);
}

ProblemInstance build_instance(const ExperimentConfig& cfg) {
  const auto& p = cfg.problem;
  DataMatrix data = build_dataset(p.dataset, p.m);
  ProblemInstance inst =
      make_shift_invert_pca(std::move(data), p.m, p.r, p.linear_seed.value_or(cfg.seed), p.regularizer);
  if (p.eps_f) inst = regularize_epsilon(inst, *p.eps_f);
  return inst;
}

GossipMatrix build_gossip(const GossipSpec& spec, Index m) {
  if (spec.kind == GossipSpec::Kind::lazy_ring) return build_lazy_ring(m, spec.laziness);
  return build_random_two_neighbor(m, spec.seed);
}

std::vector<RecordRow> to_records(const RunTrace& trace, double comm_weight) {
  std::vector<RecordRow> rows;
  rows.reserve(trace.rows.size());
  for (const auto& r : trace.rows) {
    RecordRow rec;
    rec.solver = trace.solver;
    rec.epoch = r.epoch;
    rec.sfo_per_agent = r.sfo;
    rec.comm_rounds = r.comm;
    rec.cost = static_cast<double>(r.sfo) + comm_weight * static_cast<double>(r.comm);
    rec.suboptimality = r.subopt;
    rec.consensus_error = r.consensus;
    rows.push_back(std::move(rec));
  }
  return rows;
}

void emit_csv(const std::vector<RecordRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.solver << ',' << r.epoch << ',' << r.sfo_per_agent << ',' << r.comm_rounds << ','
        << format_double(r.cost) << ',' << format_double(r.suboptimality) << ',' << format_double(r.consensus_error)
        << '\n';
  }
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

void emit_csv(const RunTrace& trace, double comm_weight, const std::filesystem::path& path) {
  emit_csv(to_records(trace, comm_weight), path);
}

std::vector<RecordRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError(source, 1, "unexpected header");
  std::vector<RecordRow> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 7) throw ParseError(source, lineno, fmt::format("expected 7 fields, got {}", fields.size()));
    RecordRow r;
    r.solver = std::string(fields[0]);
    r.epoch = parse_integer<int>(fields[1], source, lineno);
    r.sfo_per_agent = parse_integer<std::uint64_t>(fields[2], source, lineno);
    r.comm_rounds = parse_integer<std::uint64_t>(fields[3], source, lineno);
    r.cost = parse_double(fields[4], source, lineno);
    r.suboptimality = parse_double(fields[5], source, lineno);
    r.consensus_error = parse_double(fields[6], source, lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

json describe_setup(const ProblemInstance& inst, const GossipMatrix& gossip, const ExperimentConfig& cfg) {
  const auto& c = inst.constants();
  json inst_json{{"m", inst.agents()},
                 {"n", inst.per_agent()},
                 {"d", inst.dim()},
                 {"r", cfg.problem.r},
                 {"L", c.L},
                 {"ell1", c.ell1},
                 {"ell2", c.ell2},
                 {"sigma_f", c.sigma_f},
                 {"sigma_psi", inst.regularizer().sigma_psi()},
                 {"sigma", inst.sigma()},
                 {"L_local", local_smoothness(inst)},
                 {"kappa", inst.sigma() > 0.0 ? json(inst.condition_number()) : json(nullptr)},
                 {"regularizer", inst.regularizer().describe()}};
  if (const auto* q = inst.quadratic()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q->covariance(), Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    inst_json["shift"] = q->shift();
    inst_json["lambda1_A"] = ev(ev.size() - 1);
    inst_json["lambda2_A"] = ev.size() > 1 ? ev(ev.size() - 2) : 0.0;
  }
  if (cfg.problem.eps_f) inst_json["eps_f"] = *cfg.problem.eps_f;
  json gossip_json{
      {"kind", cfg.gossip.kind == GossipSpec::Kind::lazy_ring ? "lazy_ring" : "random_two_neighbor"},
      {"lambda2", gossip.lambda2()},
      {"default_M", gossip.lambda2() < 1.0 ? json(min_rounds_for_rho(gossip.lambda2(), cfg.rho_target)) : json(nullptr)}};
  return json{{"instance", inst_json}, {"gossip", gossip_json}};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
  ProblemInstance inst = build_instance(cfg);
  GossipMatrix gossip = build_gossip(cfg.gossip, cfg.problem.m);
  spdlog::info("instance m={} n={} d={} sigma={:.3e} lambda2(W)={:.4f}", inst.agents(), inst.per_agent(), inst.dim(),
               inst.sigma(), gossip.lambda2());

  ExperimentResult result;
  for (const auto& spec : cfg.solvers) {
    spdlog::info("running {}", spec.name);
    result.runs.push_back(run_one(inst, gossip, cfg, spec));
    const auto& rows = result.runs.back().trace.rows;
    spdlog::info("{}: {} rows, final objective {:.17g}", spec.name, rows.size(), rows.back().objective);
  }

  if (auto ref = closed_form_optimum(inst)) {
    result.f_star = *ref;
    result.f_star_closed_form = true;
  } else {
    result.f_star = std::numeric_limits<double>::infinity();
    for (const auto& run : result.runs) result.f_star = std::min(result.f_star, run.trace.best_objective());
  }
  for (auto& run : result.runs) run.trace.set_reference(result.f_star);

  json manifest = describe_setup(inst, gossip, cfg);
  manifest["f_star"] = result.f_star;
  manifest["f_star_source"] = result.f_star_closed_form ? "closed_form" : "best_achieved";
  manifest["comm_weight"] = cfg.comm_weight;
  manifest["seed"] = cfg.seed;
  manifest["solvers"] = json::array();
  for (const auto& run : result.runs) {
    const auto& last = run.trace.rows.back();
    manifest["solvers"].push_back(json{{"name", run.spec.name},
                                       {"csv", run.spec.name + ".csv"},
                                       {"hyperparameters", run.hyperparameters},
                                       {"epochs", last.epoch},
                                       {"final_subopt", last.subopt},
                                       {"sfo", last.sfo},
                                       {"comm", last.comm}});
  }
  result.manifest = manifest;

  if (write_files) {
    std::filesystem::create_directories(cfg.output);
    for (const auto& run : result.runs) emit_csv(run.trace, cfg.comm_weight, cfg.output / (run.spec.name + ".csv"));
    std::ofstream out(cfg.output / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", (cfg.output / "manifest.json").string()));
    out << manifest.dump(2) << '\n';
  }
  return result;
}

}  // namespace decopt
