#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cawr/dataset.hpp"
#include "cawr/errors.hpp"
#include "cawr/tasks.hpp"
#include "doctest.h"
#include "support/test_oracles.hpp"

using namespace cawr;

namespace {

Transition make_transition(double s, double a, double r, double s2, bool done) {
  Transition t;
  t.state = {s};
  t.action = {a};
  t.reward = r;
  t.next_state = {s2};
  t.terminal = done;
  return t;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("construction validates and assigns dense indices") {
  std::vector<Transition> ts;
  ts.push_back(make_transition(0, 1, 0.5, 0, true));
  ts.push_back(make_transition(0, -1, -0.5, 0, true));
  ts[0].index = 99;  // ignored: constructor reindexes
  Dataset data(std::move(ts), {});
  CHECK(data.size() == 2);
  CHECK(data[0].index == 0);
  CHECK(data[1].index == 1);
  CHECK(data.state_dim() == 1);
  CHECK(data.action_dim() == 1);
}

TEST_CASE("construction rejects bad input") {
  CHECK_THROWS_AS(Dataset({}, {}), ValidationError);

  std::vector<Transition> mixed_dims;
  mixed_dims.push_back(make_transition(0, 1, 0, 0, true));
  mixed_dims.push_back(make_transition(0, 1, 0, 0, true));
  mixed_dims[1].state = {0.0, 0.0};
  CHECK_THROWS_AS(Dataset(std::move(mixed_dims), {}), ValidationError);

  std::vector<Transition> nan_reward;
  nan_reward.push_back(make_transition(0, 1, std::nan(""), 0, true));
  CHECK_THROWS_AS(Dataset(std::move(nan_reward), {}), ValidationError);

  std::vector<Transition> above_bound;
  above_bound.push_back(make_transition(0, 1, 2.0, 0, true));
  DatasetMeta meta;
  meta.reward_bound = 1.0;
  CHECK_THROWS_AS(Dataset(std::move(above_bound), meta), ValidationError);
}

TEST_CASE("degenerate mixtures produce single-component actions") {
  BanditTask task{1.0};
  ContinuousMixture pure_good{PointAction{{1.0}}, PointAction{{-1.0}}, 0.0};
  const Dataset all_good = generate_dataset(task, pure_good, 200, 3);
  for (const Transition& t : all_good) CHECK(t.action[0] == 1.0);

  ContinuousMixture pure_poor{PointAction{{1.0}}, PointAction{{-1.0}}, 1.0};
  const Dataset all_poor = generate_dataset(task, pure_poor, 200, 3);
  for (const Transition& t : all_poor) CHECK(t.action[0] == -1.0);
}

TEST_CASE("mixture frequency concentrates at epsilon") {
  // Binomial concentration: at n = 10^4 and p = 0.25 the stated window
  // [0.24, 0.26] is about 2.3 standard deviations wide.
  BanditTask task{1.0};
  ContinuousMixture mix{PointAction{{1.0}}, PointAction{{-1.0}}, 0.25};
  const Dataset data = generate_dataset(task, mix, 10000, 17);
  std::size_t poor = 0;
  for (const Transition& t : data) {
    if (t.action[0] == -1.0) ++poor;
  }
  const double frac = static_cast<double>(poor) / static_cast<double>(data.size());
  CHECK(frac >= 0.24);
  CHECK(frac <= 0.26);
}

TEST_CASE("mixture epsilon outside [0,1] is a configuration error") {
  BanditTask task{1.0};
  ContinuousMixture bad{PointAction{{1.0}}, PointAction{{-1.0}}, 1.5};
  CHECK_THROWS_AS(generate_dataset(task, bad, 10, 1), ConfigError);
}

TEST_CASE("generator is a pure function of its arguments") {
  GridworldSpec spec;
  const TabularMDP world = make_gridworld(spec);
  DiscreteMixture mix{optimal_policy_with_explore(world, 0.2), uniform_policy(world), 0.5};
  const Dataset a = generate_dataset(world, mix, 50, 20, 123);
  const Dataset b = generate_dataset(world, mix, 50, 20, 123);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state == b[i].state);
    CHECK(a[i].action == b[i].action);
    CHECK(a[i].reward == b[i].reward);
    CHECK(a[i].next_state == b[i].next_state);
    CHECK(a[i].terminal == b[i].terminal);
  }
}

TEST_CASE("per-state empirical action frequencies converge to the mixture") {
  // Two-state world with distinct mixture rows; law of large numbers at
  // roughly 1e5 samples, 3-sigma tolerance per (s, a) cell.
  const std::size_t n = 2, na = 2;
  std::vector<double> kernel{0.0, 1.0, 0.0, 1.0,   // s0: both actions flip state
                             1.0, 0.0, 1.0, 0.0};  // s1: both actions flip state
  std::vector<double> rewards(n * na, 0.0);
  TabularMDP world(n, na, kernel, rewards, 0.9, {1.0, 0.0});
  DiscreteMixture mix;
  mix.good = {{0.9, 0.1}, {0.3, 0.7}};
  mix.poor = {{0.2, 0.8}, {0.5, 0.5}};
  mix.epsilon = 0.4;
  const Dataset data = generate_dataset(world, mix, 2000, 50, 99);
  REQUIRE(data.size() == 100000);

  std::vector<std::size_t> counts(n * na, 0), state_counts(n, 0);
  for (const Transition& t : data) {
    const auto s = static_cast<std::size_t>(t.state[0]);
    const auto a = static_cast<std::size_t>(t.action[0]);
    counts[s * na + a] += 1;
    state_counts[s] += 1;
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const double p = (1.0 - mix.epsilon) * mix.good[s][a] + mix.epsilon * mix.poor[s][a];
      const double observed =
          static_cast<double>(counts[s * na + a]) / static_cast<double>(state_counts[s]);
      const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(state_counts[s]));
      CHECK(std::abs(observed - p) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("jsonl round trip preserves every record") {
  BanditTask task{1.0};
  ContinuousMixture mix{GaussianAction{{1.0}, 0.3}, GaussianAction{{-1.0}, 0.2}, 0.3};
  const Dataset data = generate_dataset(task, mix, 100, 5);
  const std::string path = temp_path("cawr_test_roundtrip.jsonl");
  write_jsonl(data, path);
  const Dataset loaded = read_jsonl(path);
  REQUIRE(loaded.size() == data.size());
  CHECK(loaded.meta().epsilon == data.meta().epsilon);
  CHECK(loaded.meta().seed == data.meta().seed);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(loaded[i].state == data[i].state);
    CHECK(loaded[i].action == data[i].action);
    CHECK(loaded[i].reward == data[i].reward);
    CHECK(loaded[i].next_state == data[i].next_state);
    CHECK(loaded[i].terminal == data[i].terminal);
  }
  std::filesystem::remove(path);
}

TEST_CASE("ingest errors carry line numbers") {
  const std::string path = temp_path("cawr_test_bad.jsonl");
  {
    std::ofstream out(path);
    out << R"({"meta":{"state_dim":1,"action_dim":1}})" << '\n';
    out << R"({"s":[0],"a":[1],"r":0.5,"s2":[0],"done":true})" << '\n';
    out << "this is not json" << '\n';
  }
  try {
    read_jsonl(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("empty dataset file is an error, single line is fine") {
  const std::string empty = temp_path("cawr_test_empty.jsonl");
  { std::ofstream out(empty); }
  CHECK_THROWS_AS(read_jsonl(empty), ValidationError);
  std::filesystem::remove(empty);

  const std::string single = temp_path("cawr_test_single.jsonl");
  {
    std::ofstream out(single);
    out << R"({"s":[0],"a":[1],"r":0.5,"s2":[0],"done":true})" << '\n';
  }
  const Dataset data = read_jsonl(single);
  CHECK(data.size() == 1);
  std::filesystem::remove(single);
}

TEST_CASE("dimension drift across lines is an error") {
  const std::string path = temp_path("cawr_test_drift.jsonl");
  {
    std::ofstream out(path);
    out << R"({"s":[0],"a":[1],"r":0.5,"s2":[0],"done":true})" << '\n';
    out << R"({"s":[0,1],"a":[1],"r":0.5,"s2":[0,1],"done":true})" << '\n';
  }
  CHECK_THROWS_AS(read_jsonl(path), ValidationError);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
