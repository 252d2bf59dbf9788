#include "cawr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cawr/errors.hpp"
#include "json.hpp"

namespace cawr {

using nlohmann::json;

ScoreTable ScoreTable::builtin() {
  ScoreTable t;
  t.add("hopper", {-20.27, 3234.3});
  t.add("walker2d", {1.63, 4592.3});
  t.add("halfcheetah", {-280.18, 12135.0});
  return t;
}

void ScoreTable::add(const std::string& task, ScoreEntry entry) {
  if (!(entry.j_expert > entry.j_random)) {
    throw ConfigError("score table entry for '" + task + "' needs j_expert > j_random");
  }
  entries_[task] = entry;
}

const ScoreEntry& ScoreTable::at(const std::string& task) const {
  const auto it = entries_.find(task);
  if (it == entries_.end()) throw ConfigError("no score entry for task '" + task + "'");
  return it->second;
}

double normalized_score(double j, const ScoreEntry& entry) {
  if (entry.j_expert == entry.j_random) {
    throw ConfigError("score endpoints coincide; normalized score undefined");
  }
  return (j - entry.j_random) / (entry.j_expert - entry.j_random) * 100.0;
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (known.find(key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

struct Profile {
  std::size_t iterations;
  std::size_t eval_interval;
};

Profile profile_defaults(const std::string& name) {
  if (name == "desk") return {20000, 500};
  if (name == "paper") return {400000, 10000};
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

RobustLoss loss_from_json(const json& j, double sigma) {
  reject_unknown_keys(j, {"kind", "kappa", "c1", "c2", "c3", "tighten_strength"}, "loss");
  const LossKind kind = loss_kind_from_string(j.value("kind", std::string{"l2"}));
  switch (kind) {
    case LossKind::L2: return RobustLoss::l2();
    case LossKind::L1: return RobustLoss::l1();
    case LossKind::Huber: return RobustLoss::huber(j.value("kappa", 0.2));
    case LossKind::Flat: {
      RobustLoss base = RobustLoss::flat_for_sigma(sigma);
      return RobustLoss::flat(j.value("c1", base.c1), j.value("c2", base.c2), j.value("c3", base.c3));
    }
    case LossKind::Skew: {
      RobustLoss base = RobustLoss::skew_for_sigma(sigma);
      return RobustLoss::skew(j.value("c1", base.c1), j.value("c2", base.c2), j.value("c3", base.c3));
    }
  }
  return RobustLoss::l2();
}

json loss_to_json(const RobustLoss& loss, double tighten) {
  json j{{"kind", to_string(loss.kind)}};
  if (loss.kind == LossKind::Huber) j["kappa"] = loss.kappa;
  if (loss.kind == LossKind::Flat || loss.kind == LossKind::Skew) {
    j["c1"] = loss.c1;
    j["c2"] = loss.c2;
    j["c3"] = loss.c3;
  }
  if (tighten > 0.0) j["tighten_strength"] = tighten;
  return j;
}

PriorityScheme priority_from_json(const json& j, double lambda) {
  reject_unknown_keys(
      j, {"kind", "lambda", "quantile_level", "odpr_scale", "floor", "p_max", "stats_ema"},
      "priority");
  PriorityScheme s;
  s.kind = priority_kind_from_string(j.value("kind", std::string{"none"}));
  s.lambda = j.value("lambda", lambda);  // defaults to the weight lambda
  s.quantile_level = j.value("quantile_level", 0.5);
  s.odpr_scale = j.value("odpr_scale", 1.0);
  s.priority_floor = j.value("floor", 1e-6);
  s.p_max = j.value("p_max", 1e4);
  s.stats_ema = j.value("stats_ema", 0.0);
  return s;
}

json priority_to_json(const PriorityScheme& s) {
  return json{{"kind", to_string(s.kind)},       {"lambda", s.lambda},
              {"quantile_level", s.quantile_level}, {"odpr_scale", s.odpr_scale},
              {"floor", s.priority_floor},       {"p_max", s.p_max},
              {"stats_ema", s.stats_ema}};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& profile) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  const Profile prof = profile_defaults(profile);

  reject_unknown_keys(j,
                      {"task", "dataset", "loss", "priority", "lambda", "w_max", "tau", "sigma",
                       "gamma", "batch_size", "iterations", "eval_interval", "eval_episodes",
                       "eval_stochastic", "learning_rate", "soft_target_coeff", "hidden", "seeds",
                       "score", "advantage_threshold", "ablate"},
                      "config");

  ExperimentConfig cfg;

  if (j.contains("task")) {
    const json& t = j.at("task");
    reject_unknown_keys(t,
                        {"kind", "target", "width", "height", "step_reward", "goal_reward",
                         "eval_horizon", "action_target"},
                        "task");
    cfg.task.kind = t.value("kind", std::string{"bandit"});
    if (cfg.task.kind != "bandit" && cfg.task.kind != "gridworld") {
      throw ConfigError("unknown task kind '" + cfg.task.kind + "'");
    }
    cfg.task.bandit_target = t.value("target", 1.0);
    cfg.task.grid.width = t.value("width", std::size_t{5});
    cfg.task.grid.height = t.value("height", std::size_t{5});
    cfg.task.grid.step_reward = t.value("step_reward", -1.0);
    cfg.task.grid.goal_reward = t.value("goal_reward", 10.0);
    cfg.task.eval_horizon = t.value("eval_horizon", std::size_t{60});
    cfg.task.action_target = t.value("action_target", std::string{"index"});
    if (cfg.task.action_target != "index" && cfg.task.action_target != "onehot") {
      throw ConfigError("action_target must be 'index' or 'onehot'");
    }
  }

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown_keys(d,
                        {"path", "epsilon", "n_episodes", "horizon", "seed", "good_policy",
                         "poor_policy", "good_explore", "poor_action", "poor_actions", "good_mean",
                         "poor_mean", "good_std", "poor_std"},
                        "dataset");
    DatasetSpec& ds = cfg.dataset;
    ds.path = d.value("path", std::string{});
    ds.epsilon = d.value("epsilon", 0.5);
    ds.n_episodes = d.value("n_episodes", std::size_t{1000});
    ds.horizon = d.value("horizon", std::size_t{1});
    ds.seed = d.value("seed", std::uint64_t{7});
    ds.good_policy = d.value("good_policy", std::string{"optimal"});
    ds.poor_policy = d.value("poor_policy", std::string{"constant"});
    ds.good_explore = d.value("good_explore", 0.1);
    ds.poor_action = d.value("poor_action", std::size_t{0});
    ds.poor_actions = d.value("poor_actions", std::vector<std::size_t>{});
    ds.good_mean = d.value("good_mean", 1.0);
    ds.poor_mean = d.value("poor_mean", -1.0);
    ds.good_std = d.value("good_std", 0.0);
    ds.poor_std = d.value("poor_std", 0.0);
  }

  TrainConfig& tr = cfg.train;
  tr.sigma = j.value("sigma", std::exp(-2.0));
  tr.lambda = j.value("lambda", 1.0 / 3.0);
  if (!(tr.lambda > 0.0)) throw ConfigError("lambda must be positive");
  tr.w_max = j.value("w_max", 1e4);
  if (!(tr.w_max > 0.0)) throw ConfigError("w_max must be positive");
  tr.tau = j.value("tau", 0.7);
  tr.gamma = j.value("gamma", 0.99);
  if (!(tr.gamma > 0.0 && tr.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  tr.batch_size = j.value("batch_size", std::size_t{512});
  tr.iterations = j.value("iterations", prof.iterations);
  tr.eval_interval = j.value("eval_interval", prof.eval_interval);
  tr.eval_episodes = j.value("eval_episodes", std::size_t{10});
  tr.eval_stochastic = j.value("eval_stochastic", false);
  tr.soft_target_coeff = j.value("soft_target_coeff", 0.005);
  tr.advantage_threshold = j.value("advantage_threshold", 0.0);

  if (j.contains("learning_rate")) {
    const json& lr = j.at("learning_rate");
    reject_unknown_keys(lr, {"policy", "value", "q"}, "learning_rate");
    tr.lr.policy = lr.value("policy", 3e-4);
    tr.lr.value = lr.value("value", 3e-4);
    tr.lr.q = lr.value("q", 3e-4);
  }
  if (j.contains("hidden")) {
    const json& h = j.at("hidden");
    reject_unknown_keys(h, {"value", "policy"}, "hidden");
    tr.value_hidden = h.value("value", std::vector<std::size_t>{64, 64});
    tr.policy_hidden = h.value("policy", std::vector<std::size_t>{64, 64});
  }

  tr.loss = loss_from_json(j.value("loss", json::object()), tr.sigma);
  if (j.contains("loss")) tr.tighten_strength = j.at("loss").value("tighten_strength", 0.0);
  tr.scheme = priority_from_json(j.value("priority", json::object()), tr.lambda);
  tr.scheme.p_max = j.contains("priority") && j.at("priority").contains("p_max")
                        ? tr.scheme.p_max
                        : tr.w_max;  // priorities clip at w_max unless overridden

  cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{0, 1, 2});
  if (cfg.seeds.empty()) throw ConfigError("need at least one seed");

  if (j.contains("score")) {
    const json& s = j.at("score");
    reject_unknown_keys(s, {"j_random", "j_expert", "reference"}, "score");
    cfg.score_explicit = true;
    tr.score_j_random = s.value("j_random", 0.0);
    tr.score_j_expert = s.value("j_expert", 1.0);
    if (!(tr.score_j_expert > tr.score_j_random)) {
      throw ConfigError("score needs j_expert > j_random");
    }
    if (s.contains("reference")) cfg.score_reference = s.at("reference").get<double>();
  }

  if (j.contains("ablate")) {
    const json& ab = j.at("ablate");
    reject_unknown_keys(ab, {"losses", "priorities"}, "ablate");
    cfg.ablate_losses = ab.value("losses", std::vector<std::string>{});
    cfg.ablate_priorities = ab.value("priorities", std::vector<std::string>{});
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, const std::string& profile) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), profile);
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["task"] = {{"kind", task.kind},
               {"target", task.bandit_target},
               {"width", task.grid.width},
               {"height", task.grid.height},
               {"step_reward", task.grid.step_reward},
               {"goal_reward", task.grid.goal_reward},
               {"eval_horizon", task.eval_horizon},
               {"action_target", task.action_target}};
  j["dataset"] = {{"path", dataset.path},
                  {"epsilon", dataset.epsilon},
                  {"n_episodes", dataset.n_episodes},
                  {"horizon", dataset.horizon},
                  {"seed", dataset.seed},
                  {"good_policy", dataset.good_policy},
                  {"poor_policy", dataset.poor_policy},
                  {"good_explore", dataset.good_explore},
                  {"poor_action", dataset.poor_action},
                  {"poor_actions", dataset.poor_actions},
                  {"good_mean", dataset.good_mean},
                  {"poor_mean", dataset.poor_mean},
                  {"good_std", dataset.good_std},
                  {"poor_std", dataset.poor_std}};
  j["loss"] = loss_to_json(train.loss, train.tighten_strength);
  j["priority"] = priority_to_json(train.scheme);
  j["lambda"] = train.lambda;
  j["w_max"] = train.w_max;
  j["tau"] = train.tau;
  j["sigma"] = train.sigma;
  j["gamma"] = train.gamma;
  j["batch_size"] = train.batch_size;
  j["iterations"] = train.iterations;
  j["eval_interval"] = train.eval_interval;
  j["eval_episodes"] = train.eval_episodes;
  j["eval_stochastic"] = train.eval_stochastic;
  j["learning_rate"] = {{"policy", train.lr.policy}, {"value", train.lr.value}, {"q", train.lr.q}};
  j["soft_target_coeff"] = train.soft_target_coeff;
  j["hidden"] = {{"value", train.value_hidden}, {"policy", train.policy_hidden}};
  j["seeds"] = seeds;
  j["advantage_threshold"] = train.advantage_threshold;
  json score{{"j_random", train.score_j_random}, {"j_expert", train.score_j_expert}};
  if (score_reference.has_value()) score["reference"] = *score_reference;
  j["score"] = score;
  if (!ablate_losses.empty() || !ablate_priorities.empty()) {
    j["ablate"] = {{"losses", ablate_losses}, {"priorities", ablate_priorities}};
  }
  return j.dump(2);
}

}  // namespace cawr
