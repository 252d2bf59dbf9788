#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cawr/harness.hpp"

namespace {

cawr::ExperimentConfig load_config(const std::string& path, const std::string& profile) {
  return cawr::ExperimentConfig::load(path, profile);
}

int cmd_generate_dataset(const std::string& config_path, const std::string& profile,
                         const std::string& out, std::int64_t seed_override) {
  cawr::ExperimentConfig config = load_config(config_path, profile);
  if (seed_override >= 0) config.dataset.seed = static_cast<std::uint64_t>(seed_override);
  const cawr::BuiltTask task = cawr::build_task(config);
  const cawr::Dataset data = cawr::build_dataset(config, task);
  cawr::write_jsonl(data, out);
  const cawr::ScoreEntry scores = cawr::suggest_scores(task);
  std::cout << "wrote " << data.size() << " transitions to " << out << "\n"
            << "suggested score endpoints: j_random=" << scores.j_random
            << " j_expert=" << scores.j_expert << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& profile, const std::string& out,
              std::int64_t seed_override, int jobs) {
  cawr::ExperimentConfig config = load_config(config_path, profile);
  if (seed_override >= 0) config.seeds = {static_cast<std::uint64_t>(seed_override)};
  const cawr::ExperimentResult result = cawr::run_experiment(config, out, jobs);
  if (result.failed) {
    std::cout << "run FAILED (" << result.failed_seeds.size() << " diverged seeds); artifacts in "
              << out << "\n";
    return 1;
  }
  std::cout << "final return " << result.final_return_mean << " +- " << result.final_return_std
            << "  score " << result.final_score_mean << "  score_k " << result.final_score_k_mean
            << "\nartifacts in " << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& profile,
                 const std::string& policy_path, std::size_t episodes, std::uint64_t seed) {
  cawr::ExperimentConfig config = load_config(config_path, profile);
  const cawr::BuiltTask task = cawr::build_task(config);

  std::ifstream in(policy_path);
  if (!in) {
    std::cerr << "cannot open policy checkpoint: " << policy_path << "\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  cawr::PolicySnapshot policy(cawr::Mlp::deserialize(buffer.str()), config.train.sigma);

  const std::unique_ptr<cawr::Env> env = task.make_env();
  const cawr::EvalResult eval =
      cawr::evaluate_policy(policy, *env, task.encoding, episodes, seed, config.train.gamma,
                            config.train.eval_stochastic);
  double score = 0.0;
  if (config.score_explicit) {
    score = cawr::normalized_score(eval.mean_return,
                                   {config.train.score_j_random, config.train.score_j_expert});
  } else {
    score = cawr::normalized_score(eval.mean_return, cawr::suggest_scores(task));
  }
  std::cout << "return " << eval.mean_return << " +- " << eval.std_return << "  discounted "
            << eval.mean_discounted << " +- " << eval.std_discounted << "  score " << score << "\n";
  return 0;
}

int cmd_verify_theorems(const std::string& out, std::uint64_t seed, bool quick) {
  cawr::oracle::TheoremSuiteOptions options;
  options.seed = seed;
  if (quick) {
    options.closed_form_instances = 20;
    options.kl_instances = 100;
    options.bias_instances = 60;
    options.l2_equivalence_probes = 1000;
    options.resampling_instances = 5;
  }
  const cawr::oracle::TheoremSuiteReport report = cawr::oracle::run_theorem_suite(options);
  for (const cawr::oracle::CheckReport& c : report.checks) {
    std::printf("[%s] %-26s margin=%-12.5g %5.2fs  %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.margin, c.seconds, c.details.c_str());
  }
  if (!out.empty()) {
    cawr::write_theorem_report(report, out);
    std::cout << "report written to " << out << "\n";
  }
  return report.all_pass() ? 0 : 1;
}

int cmd_ablate(const std::string& config_path, const std::string& profile, const std::string& out,
               int jobs) {
  const cawr::ExperimentConfig config = load_config(config_path, profile);
  const std::vector<cawr::AblationCell> cells = cawr::run_ablation(config, out, jobs);
  std::printf("%-8s %-10s %14s %14s %10s\n", "loss", "priority", "return", "std", "score_k");
  for (const cawr::AblationCell& cell : cells) {
    std::printf("%-8s %-10s %14.4f %14.4f %10.2f%s\n", cell.loss.c_str(), cell.priority.c_str(),
                cell.result.final_return_mean, cell.result.final_return_std,
                cell.result.final_score_k_mean, cell.result.failed ? "  [FAILED]" : "");
  }
  std::cout << "summary in " << out << "/ablation.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cawr: corruption-averse advantage-weighted regression toolkit"};
  app.require_subcommand(1);

  std::string config_path, out, policy_path, profile = "desk";
  std::int64_t seed_override = -1;
  std::uint64_t eval_seed = 0, suite_seed = 20260808;
  std::size_t episodes = 10;
  int jobs = 1;
  bool quick = false;

  auto* gen = app.add_subcommand("generate-dataset", "synthesize an offline dataset");
  gen->add_option("--config", config_path, "experiment config file")->required();
  gen->add_option("--out", out, "dataset output path")->required();
  gen->add_option("--profile", profile, "desk or paper");
  gen->add_option("--seed", seed_override, "override the generator seed");

  auto* train = app.add_subcommand("train", "run training for every configured seed");
  train->add_option("--config", config_path, "experiment config file")->required();
  train->add_option("--out", out, "output directory")->required();
  train->add_option("--profile", profile, "desk or paper");
  train->add_option("--seed", seed_override, "train a single seed instead of the configured list");
  train->add_option("--jobs", jobs, "parallel seed jobs");

  auto* eval = app.add_subcommand("evaluate", "evaluate a policy checkpoint");
  eval->add_option("--config", config_path, "experiment config file")->required();
  eval->add_option("--policy", policy_path, "policy checkpoint (policy_final.json)")->required();
  eval->add_option("--profile", profile, "desk or paper");
  eval->add_option("--episodes", episodes, "evaluation episodes");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  auto* verify = app.add_subcommand("verify-theorems", "run the closed-form verification suite");
  verify->add_option("--out", out, "JSON report path");
  verify->add_option("--seed", suite_seed, "suite seed");
  verify->add_flag("--quick", quick, "smaller instance counts");

  auto* ablate = app.add_subcommand("ablate", "run the loss x priority grid");
  ablate->add_option("--config", config_path, "experiment config file")->required();
  ablate->add_option("--out", out, "output directory")->required();
  ablate->add_option("--profile", profile, "desk or paper");
  ablate->add_option("--jobs", jobs, "parallel seed jobs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate_dataset(config_path, profile, out, seed_override);
    if (train->parsed()) return cmd_train(config_path, profile, out, seed_override, jobs);
    if (eval->parsed()) return cmd_evaluate(config_path, profile, policy_path, episodes, eval_seed);
    if (verify->parsed()) return cmd_verify_theorems(out, suite_seed, quick);
    if (ablate->parsed()) return cmd_ablate(config_path, profile, out, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
