#include "cawr/dataset.hpp"

#include <cmath>
#include <fstream>

#include "cawr/errors.hpp"
#include "json.hpp"

namespace cawr {

Dataset::Dataset(std::vector<Transition> transitions, DatasetMeta meta)
    : transitions_(std::move(transitions)), meta_(std::move(meta)) {
  if (transitions_.empty()) throw ValidationError("dataset must contain at least one transition");
  if (meta_.state_dim == 0) meta_.state_dim = transitions_.front().state.size();
  if (meta_.action_dim == 0) meta_.action_dim = transitions_.front().action.size();
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    Transition& t = transitions_[i];
    if (t.state.size() != meta_.state_dim || t.next_state.size() != meta_.state_dim) {
      throw ValidationError("transition " + std::to_string(i) + ": state dimension mismatch");
    }
    if (t.action.size() != meta_.action_dim) {
      throw ValidationError("transition " + std::to_string(i) + ": action dimension mismatch");
    }
    if (!std::isfinite(t.reward)) {
      throw ValidationError("transition " + std::to_string(i) + ": non-finite reward");
    }
    if (t.reward > meta_.reward_bound) {
      throw ValidationError("transition " + std::to_string(i) + ": reward exceeds bound " +
                            std::to_string(meta_.reward_bound));
    }
    t.index = i;  // dense, unique in [0, |D|)
  }
}

namespace {

nlohmann::json meta_to_json(const DatasetMeta& meta) {
  nlohmann::json j{{"state_dim", meta.state_dim},
                   {"action_dim", meta.action_dim},
                   {"epsilon", meta.epsilon},
                   {"seed", meta.seed}};
  if (std::isfinite(meta.reward_bound)) j["reward_bound"] = meta.reward_bound;
  if (!meta.good_policy.empty()) j["good_policy"] = meta.good_policy;
  if (!meta.poor_policy.empty()) j["poor_policy"] = meta.poor_policy;
  return j;
}

DatasetMeta meta_from_json(const nlohmann::json& j) {
  DatasetMeta meta;
  meta.state_dim = j.at("state_dim").get<std::size_t>();
  meta.action_dim = j.at("action_dim").get<std::size_t>();
  meta.epsilon = j.value("epsilon", 0.0);
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.reward_bound = j.value("reward_bound", std::numeric_limits<double>::infinity());
  meta.good_policy = j.value("good_policy", std::string{});
  meta.poor_policy = j.value("poor_policy", std::string{});
  return meta;
}

}  // namespace

Dataset read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file: " + path);

  std::string line;
  std::size_t line_no = 0;
  DatasetMeta meta;
  bool have_meta = false;
  std::vector<Transition> transitions;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    try {
      if (j.contains("meta")) {
        meta = meta_from_json(j.at("meta"));
        have_meta = true;
        continue;
      }
      Transition t;
      t.state = j.at("s").get<std::vector<double>>();
      t.action = j.at("a").get<std::vector<double>>();
      t.reward = j.at("r").get<double>();
      t.next_state = j.at("s2").get<std::vector<double>>();
      t.terminal = j.at("done").get<bool>();
      transitions.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": bad transition record: " + e.what());
    }
  }
  if (transitions.empty()) {
    throw ValidationError(path + ": no transitions found");
  }
  if (!have_meta) {
    meta.state_dim = transitions.front().state.size();
    meta.action_dim = transitions.front().action.size();
  }
  try {
    return Dataset(std::move(transitions), std::move(meta));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_jsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << nlohmann::json{{"meta", meta_to_json(dataset.meta())}}.dump() << '\n';
  for (const Transition& t : dataset) {
    out << nlohmann::json{{"s", t.state},
                          {"a", t.action},
                          {"r", t.reward},
                          {"s2", t.next_state},
                          {"done", t.terminal}}
               .dump()
        << '\n';
  }
}

}  // namespace cawr
