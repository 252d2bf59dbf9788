#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace cawr {

/// One offline sample: (s, a, r, s', done) with its position in the dataset.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  std::size_t index = 0;
};

/// Generator provenance carried with a dataset.
struct DatasetMeta {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double epsilon = 0.0;     // mixture weight of the poor policy
  std::uint64_t seed = 0;   // generator seed
  double reward_bound = std::numeric_limits<double>::infinity();  // upper bound on r
  std::string good_policy;
  std::string poor_policy;
};

/// Immutable collection of transitions. Construction validates dimension
/// consistency, reward finiteness / bound, and assigns dense indices; after
/// that the dataset never changes, so samplers hold indices only and
/// concurrent readers need no synchronization.
class Dataset {
 public:
  Dataset(std::vector<Transition> transitions, DatasetMeta meta);

  std::size_t size() const { return transitions_.size(); }
  std::size_t state_dim() const { return meta_.state_dim; }
  std::size_t action_dim() const { return meta_.action_dim; }
  const Transition& operator[](std::size_t i) const { return transitions_[i]; }
  const DatasetMeta& meta() const { return meta_; }

  std::vector<Transition>::const_iterator begin() const { return transitions_.begin(); }
  std::vector<Transition>::const_iterator end() const { return transitions_.end(); }

 private:
  std::vector<Transition> transitions_;
  DatasetMeta meta_;
};

/// JSON Lines I/O. First line is {"meta": {...}}, then one transition per
/// line as {"s":[...],"a":[...],"r":f,"s2":[...],"done":b}. The same format
/// ingests externally exported transition dumps.
Dataset read_jsonl(const std::string& path);
void write_jsonl(const Dataset& dataset, const std::string& path);

}  // namespace cawr
