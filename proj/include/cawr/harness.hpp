#pragma once

#include <memory>
#include <optional>

#include "cawr/config.hpp"
#include "cawr/oracle.hpp"

namespace cawr {

/// Concrete task objects built from a config. Environments returned by
/// make_env reference the contained MDP, so the BuiltTask must outlive them.
struct BuiltTask {
  std::optional<TabularMDP> mdp;      // gridworld
  std::optional<BanditTask> bandit;
  TaskEncoding encoding;
  std::size_t eval_horizon = 1;

  std::unique_ptr<Env> make_env() const;
};

BuiltTask build_task(const ExperimentConfig& config);

/// Loads the configured dataset file, or synthesizes one from the task and
/// generator settings.
Dataset build_dataset(const ExperimentConfig& config, const BuiltTask& task);

/// Reference score endpoints for a synthetic task: the exact-DP optimal
/// policy return and a uniform-random policy baseline.
ScoreEntry suggest_scores(const BuiltTask& task);

/// Metrics CSV with the fixed header
/// iteration,mean_return,std_return,score,score_k,value_loss,q_loss,
/// policy_loss,mean_weight,priority_entropy.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

struct ExperimentResult {
  std::string out_dir;
  std::vector<std::uint64_t> failed_seeds;
  bool failed = false;
  // Final-iteration aggregates across surviving seeds.
  double final_return_mean = 0.0;
  double final_return_std = 0.0;
  double final_score_mean = 0.0;
  double final_score_k_mean = 0.0;
  std::vector<double> per_seed_final_return;
  std::vector<double> per_seed_final_score_k;
};

/// Runs every configured seed (optionally on parallel threads), writing
/// seed_<k>/metrics.csv and checkpoints plus an aggregate.json recomputed
/// from the per-seed CSV files. A diverging seed is recorded in
/// failed_seeds; its partial metrics stay on disk.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                int jobs = 1);

struct AblationCell {
  std::string loss;
  std::string priority;
  ExperimentResult result;
};

/// Grid over config.ablate_losses x config.ablate_priorities; each cell runs
/// in its own subdirectory and the summary lands in ablation.json.
std::vector<AblationCell> run_ablation(const ExperimentConfig& config, const std::string& out_dir,
                                       int jobs = 1);

void write_theorem_report(const oracle::TheoremSuiteReport& report, const std::string& path);

}  // namespace cawr
