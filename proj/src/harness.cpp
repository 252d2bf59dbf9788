#include "cawr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cawr/errors.hpp"
#include "json.hpp"

namespace cawr {

namespace fs = std::filesystem;
using nlohmann::json;

std::unique_ptr<Env> BuiltTask::make_env() const {
  if (bandit.has_value()) return std::make_unique<BanditEnv>(*bandit);
  return std::make_unique<TabularEnv>(*mdp, eval_horizon);
}

BuiltTask build_task(const ExperimentConfig& config) {
  BuiltTask task;
  if (config.task.kind == "bandit") {
    task.bandit = BanditTask{config.task.bandit_target};
    task.encoding = TaskEncoding::raw(1, 1);
    task.eval_horizon = 1;
    return task;
  }
  task.mdp = make_gridworld(config.task.grid);
  task.eval_horizon = config.task.eval_horizon;
  const std::size_t n = task.mdp->n_states();
  const std::size_t na = task.mdp->n_actions();
  task.encoding = config.task.action_target == "onehot" ? TaskEncoding::tabular_onehot(n, na)
                                                        : TaskEncoding::tabular_index(n, na);
  return task;
}

namespace {

DiscretePolicy tabular_policy_from_spec(const TabularMDP& mdp, const std::string& name,
                                        const DatasetSpec& spec, bool poor) {
  if (name == "optimal") return optimal_policy_with_explore(mdp, spec.good_explore);
  if (name == "uniform") return uniform_policy(mdp);
  if (name == "constant") return constant_policy(mdp, spec.poor_action);
  if (name == "restricted") {
    if (spec.poor_actions.empty()) throw ConfigError("restricted policy needs poor_actions");
    return restricted_uniform_policy(mdp, spec.poor_actions);
  }
  throw ConfigError(std::string("unknown ") + (poor ? "poor" : "good") + "_policy '" + name + "'");
}

ActionDist continuous_dist(double mean, double stddev) {
  if (stddev <= 0.0) return PointAction{{mean}};
  return GaussianAction{{mean}, stddev};
}

}  // namespace

Dataset build_dataset(const ExperimentConfig& config, const BuiltTask& task) {
  if (!config.dataset.path.empty()) return read_jsonl(config.dataset.path);
  const DatasetSpec& spec = config.dataset;
  if (task.bandit.has_value()) {
    ContinuousMixture mixture;
    mixture.good = continuous_dist(spec.good_mean, spec.good_std);
    mixture.poor = continuous_dist(spec.poor_mean, spec.poor_std);
    mixture.epsilon = spec.epsilon;
    return generate_dataset(*task.bandit, mixture, spec.n_episodes, spec.seed);
  }
  DiscreteMixture mixture;
  mixture.good = tabular_policy_from_spec(*task.mdp, spec.good_policy, spec, false);
  mixture.poor = tabular_policy_from_spec(*task.mdp, spec.poor_policy, spec, true);
  mixture.epsilon = spec.epsilon;
  return generate_dataset(*task.mdp, mixture, spec.n_episodes, spec.horizon, spec.seed);
}

ScoreEntry suggest_scores(const BuiltTask& task) {
  if (task.bandit.has_value()) {
    // Uniform random actions in [target - 3, target + 3] average -3;
    // the optimal action scores 0.
    return ScoreEntry{-3.0, 0.0};
  }
  const TabularMDP& mdp = *task.mdp;
  const OptimalSolution sol = solve_optimal(mdp);
  Rng expert_rng(17);
  TabularEnv env(mdp, task.eval_horizon);
  double j_expert = 0.0;
  {
    std::vector<double> state = env.reset(expert_rng);
    for (std::size_t t = 0; t < env.horizon(); ++t) {
      const auto s = static_cast<std::size_t>(state[0]);
      std::size_t a = 0;
      for (std::size_t k = 0; k < mdp.n_actions(); ++k) {
        if (sol.greedy[s][k] > 0.5) a = k;
      }
      const Env::Step step = env.step({static_cast<double>(a)}, expert_rng);
      j_expert += step.reward;
      state = step.state;
      if (step.done) break;
    }
  }
  Rng random_rng(29);
  double j_random = 0.0;
  const std::size_t episodes = 200;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    std::vector<double> state = env.reset(random_rng);
    for (std::size_t t = 0; t < env.horizon(); ++t) {
      const auto a = random_rng.uniform_index(mdp.n_actions());
      const Env::Step step = env.step({static_cast<double>(a)}, random_rng);
      j_random += step.reward;
      if (step.done) break;
      state = step.state;
    }
  }
  j_random /= static_cast<double>(episodes);
  if (!(j_expert > j_random)) j_expert = j_random + 1.0;  // degenerate worlds
  return ScoreEntry{j_random, j_expert};
}

namespace {

constexpr const char* kMetricsHeader =
    "iteration,mean_return,std_return,score,score_k,value_loss,q_loss,policy_loss,mean_weight,"
    "priority_entropy";

std::string format_full(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string row_to_csv(const MetricsRow& r) {
  std::ostringstream os;
  os << r.iteration << ',' << format_full(r.mean_return) << ',' << format_full(r.std_return) << ','
     << format_full(r.score) << ',' << format_full(r.score_k) << ',' << format_full(r.value_loss)
     << ',' << format_full(r.q_loss) << ',' << format_full(r.policy_loss) << ','
     << format_full(r.mean_weight) << ',' << format_full(r.priority_entropy);
  return os.str();
}

}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) out << row_to_csv(r) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ValidationError(path + ": unexpected metrics header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(std::stod(cell));
    if (fields.size() != 10) throw ValidationError(path + ": malformed metrics row");
    MetricsRow r;
    r.iteration = static_cast<std::size_t>(fields[0]);
    r.mean_return = fields[1];
    r.std_return = fields[2];
    r.score = fields[3];
    r.score_k = fields[4];
    r.value_loss = fields[5];
    r.q_loss = fields[6];
    r.policy_loss = fields[7];
    r.mean_weight = fields[8];
    r.priority_entropy = fields[9];
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct SeedOutcome {
  bool failed = false;
  double good_fraction = 0.0;
};

json aggregate_from_seed_csvs(const ExperimentConfig& config, const std::string& out_dir,
                              const std::vector<SeedOutcome>& outcomes, ExperimentResult& result) {
  std::vector<std::vector<MetricsRow>> per_seed;
  std::vector<std::uint64_t> ok_seeds;
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    if (outcomes[i].failed) continue;
    const std::string path = out_dir + "/seed_" + std::to_string(config.seeds[i]) + "/metrics.csv";
    per_seed.push_back(read_metrics_csv(path));
    ok_seeds.push_back(config.seeds[i]);
  }

  json agg;
  agg["status"] = result.failed ? "failed" : "ok";
  agg["failed_seeds"] = result.failed_seeds;
  agg["seeds"] = ok_seeds;
  if (config.score_reference.has_value()) agg["score_reference"] = *config.score_reference;
  json diag = json::array();
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    if (!outcomes[i].failed) diag.push_back(outcomes[i].good_fraction);
  }
  agg["good_fraction"] = diag;
  if (per_seed.empty()) return agg;

  const std::size_t n_rows = per_seed.front().size();
  for (const auto& rows : per_seed) {
    if (rows.size() != n_rows) throw ValidationError("seed metrics disagree on evaluation points");
  }

  const auto mean_std_at = [&](auto getter, std::size_t k) {
    double m = 0.0;
    for (const auto& rows : per_seed) m += getter(rows[k]);
    m /= static_cast<double>(per_seed.size());
    double ss = 0.0;
    for (const auto& rows : per_seed) ss += (getter(rows[k]) - m) * (getter(rows[k]) - m);
    return std::pair<double, double>{m, std::sqrt(ss / static_cast<double>(per_seed.size()))};
  };

  std::vector<std::size_t> iters;
  std::vector<double> return_mean, return_std, score_k_mean, score_k_std, score_mean;
  for (std::size_t k = 0; k < n_rows; ++k) {
    iters.push_back(per_seed.front()[k].iteration);
    const auto [rm, rs] = mean_std_at([](const MetricsRow& r) { return r.mean_return; }, k);
    return_mean.push_back(rm);
    return_std.push_back(rs);
    const auto [km, ks] = mean_std_at([](const MetricsRow& r) { return r.score_k; }, k);
    score_k_mean.push_back(km);
    score_k_std.push_back(ks);
    score_mean.push_back(mean_std_at([](const MetricsRow& r) { return r.score; }, k).first);
  }
  agg["iterations"] = iters;
  agg["mean_return_mean"] = return_mean;
  agg["mean_return_std"] = return_std;
  agg["score_k_mean"] = score_k_mean;
  agg["score_k_std"] = score_k_std;
  agg["score_mean"] = score_mean;

  const std::size_t last = n_rows - 1;
  result.final_return_mean = return_mean[last];
  result.final_return_std = return_std[last];
  result.final_score_mean = score_mean[last];
  result.final_score_k_mean = score_k_mean[last];
  for (const auto& rows : per_seed) {
    result.per_seed_final_return.push_back(rows[last].mean_return);
    result.per_seed_final_score_k.push_back(rows[last].score_k);
  }
  agg["final"] = {{"iteration", iters[last]},
                  {"mean_return", result.final_return_mean},
                  {"std_return", result.final_return_std},
                  {"score", result.final_score_mean},
                  {"score_k", result.final_score_k_mean}};
  return agg;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config_in, const std::string& out_dir,
                                int jobs) {
  ExperimentConfig config = config_in;
  fs::create_directories(out_dir);

  const BuiltTask task = build_task(config);
  if (!config.score_explicit) {
    const ScoreEntry suggested = suggest_scores(task);
    config.train.score_j_random = suggested.j_random;
    config.train.score_j_expert = suggested.j_expert;
  }
  const Dataset data = build_dataset(config, task);
  if (config.dataset.path.empty()) {
    write_jsonl(data, out_dir + "/dataset.jsonl");
  }
  {
    std::ofstream cfg_out(out_dir + "/config.json");
    cfg_out << config.to_json_text() << '\n';
  }

  ExperimentResult result;
  result.out_dir = out_dir;
  std::vector<SeedOutcome> outcomes(config.seeds.size());
  std::mutex failure_mutex;

  const auto run_seed = [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    const std::string seed_dir = out_dir + "/seed_" + std::to_string(seed);
    fs::create_directories(seed_dir);
    TrainConfig tc = config.train;
    tc.seed = seed;
    const std::unique_ptr<Env> env = task.make_env();

    std::ofstream csv(seed_dir + "/metrics.csv");
    csv << kMetricsHeader << '\n';
    const auto on_metrics = [&csv](const MetricsRow& row) {
      csv << row_to_csv(row) << '\n';
      csv.flush();
    };
    try {
      RunArtifact artifact = train_cawr(data, task.encoding, tc, env.get(), on_metrics);
      outcomes[i].good_fraction = artifact.good_fraction;
      std::ofstream policy_out(seed_dir + "/policy_final.json");
      policy_out << artifact.policy.mean_net.serialize() << '\n';
      std::ofstream q_out(seed_dir + "/q_final.json");
      q_out << artifact.values.q.serialize() << '\n';
      std::ofstream v_out(seed_dir + "/v_final.json");
      v_out << artifact.values.v.serialize() << '\n';
    } catch (const TrainingDiverged& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      outcomes[i].failed = true;
      result.failed_seeds.push_back(seed);
      result.failed = true;
      std::ofstream fail_out(seed_dir + "/FAILED");
      fail_out << e.what() << '\n';
    }
  };

  if (jobs <= 1 || config.seeds.size() == 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) run_seed(i);
  } else {
    std::vector<std::thread> threads;
    std::size_t next = 0;
    while (next < config.seeds.size()) {
      threads.clear();
      for (int t = 0; t < jobs && next < config.seeds.size(); ++t, ++next) {
        threads.emplace_back(run_seed, next);
      }
      for (std::thread& th : threads) th.join();
    }
  }

  std::sort(result.failed_seeds.begin(), result.failed_seeds.end());
  const json agg = aggregate_from_seed_csvs(config, out_dir, outcomes, result);
  std::ofstream agg_out(out_dir + "/aggregate.json");
  agg_out << agg.dump(2) << '\n';
  return result;
}

std::vector<AblationCell> run_ablation(const ExperimentConfig& config, const std::string& out_dir,
                                       int jobs) {
  if (config.ablate_losses.empty() || config.ablate_priorities.empty()) {
    throw ConfigError("ablation needs both ablate.losses and ablate.priorities");
  }
  fs::create_directories(out_dir);
  std::vector<AblationCell> cells;
  for (const std::string& loss_name : config.ablate_losses) {
    for (const std::string& prio_name : config.ablate_priorities) {
      ExperimentConfig cell_config = config;
      const LossKind kind = loss_kind_from_string(loss_name);
      switch (kind) {
        case LossKind::L2: cell_config.train.loss = RobustLoss::l2(); break;
        case LossKind::L1: cell_config.train.loss = RobustLoss::l1(); break;
        case LossKind::Huber: cell_config.train.loss = RobustLoss::huber(config.train.loss.kappa); break;
        case LossKind::Flat: cell_config.train.loss = RobustLoss::flat_for_sigma(config.train.sigma); break;
        case LossKind::Skew: cell_config.train.loss = RobustLoss::skew_for_sigma(config.train.sigma); break;
      }
      cell_config.train.scheme = config.train.scheme;
      cell_config.train.scheme.kind = priority_kind_from_string(prio_name);
      const std::string cell_dir = out_dir + "/" + loss_name + "_" + prio_name;
      AblationCell cell;
      cell.loss = loss_name;
      cell.priority = prio_name;
      cell.result = run_experiment(cell_config, cell_dir, jobs);
      cells.push_back(std::move(cell));
    }
  }

  json summary = json::array();
  for (const AblationCell& cell : cells) {
    summary.push_back({{"loss", cell.loss},
                       {"priority", cell.priority},
                       {"final_return_mean", cell.result.final_return_mean},
                       {"final_return_std", cell.result.final_return_std},
                       {"final_score", cell.result.final_score_mean},
                       {"final_score_k", cell.result.final_score_k_mean},
                       {"failed", cell.result.failed}});
  }
  std::ofstream out(out_dir + "/ablation.json");
  out << summary.dump(2) << '\n';
  return cells;
}

void write_theorem_report(const oracle::TheoremSuiteReport& report, const std::string& path) {
  json j;
  j["all_pass"] = report.all_pass();
  json checks = json::array();
  for (const oracle::CheckReport& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"margin", c.margin},
                      {"details", c.details},
                      {"seconds", c.seconds}});
  }
  j["checks"] = checks;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace cawr
