#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cawr/policy_opt.hpp"
#include "cawr/tasks.hpp"

namespace cawr {

/// (J_random, J_expert) endpoints of the normalized score for one task.
struct ScoreEntry {
  double j_random = 0.0;
  double j_expert = 1.0;
};

/// Built-in endpoints for the locomotion benchmarks plus any entries added
/// at runtime. Requires j_expert > j_random.
class ScoreTable {
 public:
  static ScoreTable builtin();

  void add(const std::string& task, ScoreEntry entry);
  const ScoreEntry& at(const std::string& task) const;
  bool contains(const std::string& task) const { return entries_.count(task) > 0; }

 private:
  std::map<std::string, ScoreEntry> entries_;
};

/// Linear map of a return onto [0, 100] between the random and expert
/// endpoints; deliberately unclipped (scores above 100 are meaningful).
double normalized_score(double j, const ScoreEntry& entry);

/// Generator settings: either a dataset file path or synthesis parameters.
struct DatasetSpec {
  std::string path;  // when set, everything else is ignored
  double epsilon = 0.5;
  std::size_t n_episodes = 1000;
  std::size_t horizon = 1;
  std::uint64_t seed = 7;
  // Tabular policy presets: "optimal", "uniform", "constant", "restricted".
  std::string good_policy = "optimal";
  std::string poor_policy = "constant";
  double good_explore = 0.1;
  std::size_t poor_action = 0;
  std::vector<std::size_t> poor_actions;  // for "restricted"
  // Continuous (bandit) component parameters.
  double good_mean = 1.0, poor_mean = -1.0;
  double good_std = 0.0, poor_std = 0.0;  // 0 = point mass
};

struct TaskSpec {
  std::string kind = "bandit";  // "bandit" | "gridworld"
  double bandit_target = 1.0;
  GridworldSpec grid;
  std::size_t eval_horizon = 60;
  std::string action_target = "index";  // "index" | "onehot" (tabular only)
};

/// Whole-experiment configuration: task, data, algorithm and run settings.
/// Parsed from a JSON file; unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
  TaskSpec task;
  DatasetSpec dataset;
  TrainConfig train;            // per-run settings; train.seed is overridden per seed
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  bool score_explicit = false;  // false lets the harness fill task-derived endpoints
  std::optional<double> score_reference;  // external comparison line, emitted as-is
  // Ablation grid (used by the ablate command).
  std::vector<std::string> ablate_losses;
  std::vector<std::string> ablate_priorities;

  static ExperimentConfig from_json_text(const std::string& text, const std::string& profile = "desk");
  static ExperimentConfig load(const std::string& path, const std::string& profile = "desk");
  std::string to_json_text() const;  // canonical form; parse(serialize(c)) == c
};

}  // namespace cawr
