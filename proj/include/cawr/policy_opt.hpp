#pragma once

#include <functional>
#include <optional>
#include <span>

#include "cawr/approximator.hpp"
#include "cawr/dataset.hpp"
#include "cawr/encoding.hpp"
#include "cawr/priority_replay.hpp"
#include "cawr/robust_loss.hpp"
#include "cawr/tasks.hpp"
#include "cawr/value_estimation.hpp"

namespace cawr {

enum class PolicyDist { GaussianFixedStd, LaplaceFixedScale };

/// Deterministic mean network plus a fixed spread. The Laplace variant needs
/// no separate density code: its induced regression loss is the L1 norm, so
/// selecting LossKind::L1 realizes it.
struct PolicySnapshot {
  Mlp mean_net;
  double sigma;
  PolicyDist distribution = PolicyDist::GaussianFixedStd;

  PolicySnapshot(Mlp net, double sigma, PolicyDist dist = PolicyDist::GaussianFixedStd);

  std::vector<double> mean(std::span<const double> policy_input) const {
    return mean_net.forward(policy_input);
  }
};

/// Parameters of the clipped exponential advantage weight
/// w = min(exp(c2 * (A - c1)), w_max). c1/c2 reuse the priority scheme's
/// centering so the normal/quantile/standard variants share one formula;
/// non-exponential kinds fall back to the standard form (0, 1/lambda).
struct AdvantageWeight {
  double lambda = 1.0 / 3.0;
  double c1 = 0.0;
  double c2 = 3.0;
  double w_max = 1e4;

  static AdvantageWeight from_scheme(const PriorityScheme& scheme, const AdvantageStats& stats,
                                     double lambda, double w_max);
};

/// min(exp(c2 * (A - c1)), w_max); always strictly positive.
double weight(const AdvantageWeight& w, double advantage);

/// Weighted robust regression objective of the policy mean:
/// J = (1/n) sum_i (w_i / (2 sigma^2)) sum_j f(a_ij - mu_j(s_i)).
struct PolicyLossResult {
  double loss = 0.0;
  std::vector<double> grad;  // dJ/dParams of the mean network
};
PolicyLossResult policy_loss(const PolicySnapshot& policy, const RobustLoss& loss,
                             const Dataset& data, const TaskEncoding& enc,
                             std::span<const std::size_t> batch, std::span<const double> weights);

/// One SGD step on policy_loss; returns the batch loss.
double policy_step(PolicySnapshot& policy, const RobustLoss& loss, const Dataset& data,
                   const TaskEncoding& enc, std::span<const std::size_t> batch,
                   std::span<const double> weights, double lr);

/// Rollout evaluation. Mean (deterministic) actions by default; with
/// stochastic = true actions get N(0, sigma^2) noise per dimension.
struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_discounted = 0.0;
  double std_discounted = 0.0;
  std::vector<double> returns;
};
EvalResult evaluate_policy(const PolicySnapshot& policy, Env& env, const TaskEncoding& enc,
                           std::size_t n_episodes, std::uint64_t seed, double gamma,
                           bool stochastic = false);

/// Running maximum of a score history.
std::vector<double> best_so_far(std::span<const double> scores);

struct LearningRates {
  double policy = 3e-4;
  double value = 3e-4;
  double q = 3e-4;
};

/// Everything one training run needs. Defaults mirror the shared full-scale
/// hyperparameters (batch 512, gamma 0.99, lr 3e-4, soft update 0.005,
/// expectile 0.7, log-std -2); desk-scale configs override them.
struct TrainConfig {
  std::size_t iterations = 20000;
  std::size_t batch_size = 512;
  double gamma = 0.99;
  double tau = 0.7;
  double sigma = 0.1353352832366127;  // exp(-2)
  double lambda = 1.0 / 3.0;
  double w_max = 1e4;
  RobustLoss loss = RobustLoss::l2();
  PriorityScheme scheme;
  LearningRates lr;
  double soft_target_coeff = 0.005;
  std::vector<std::size_t> value_hidden = {64, 64};
  std::vector<std::size_t> policy_hidden = {64, 64};
  double tighten_strength = 0.0;  // > 0 shrinks the Flat/Skew convex region over training
  std::size_t eval_interval = 500;
  std::size_t eval_episodes = 10;
  bool eval_stochastic = false;
  std::uint64_t seed = 0;
  double score_j_random = 0.0;
  double score_j_expert = 1.0;
  double advantage_threshold = 0.0;  // diagnostic split between good/poor exploration
};

/// One metrics row per evaluation point.
struct MetricsRow {
  std::size_t iteration = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double score = 0.0;
  double score_k = 0.0;
  double value_loss = 0.0;
  double q_loss = 0.0;
  double policy_loss = 0.0;
  double mean_weight = 0.0;
  double priority_entropy = 0.0;
};

struct RunArtifact {
  PolicySnapshot policy;
  ValueNets values;
  std::vector<MetricsRow> metrics;
  double good_fraction = 0.0;  // share of transitions with final advantage above threshold
};

/// Network builders shared by the trainer and by reference loops in tests.
ValueNets make_value_nets(const TaskEncoding& enc, const std::vector<std::size_t>& hidden,
                          double tau, double soft_coeff, Rng& rng);
PolicySnapshot make_policy(const TaskEncoding& enc, const std::vector<std::size_t>& hidden,
                           double sigma, Rng& rng);

/// Full training loop: priorities initialized to 1; per iteration a uniform
/// batch trains V (expectile) and Q (TD), a prioritized batch trains the
/// policy with the robust loss, and priorities of both batches are then
/// overwritten from the fresh advantages. env may be null to skip rollout
/// evaluation (returns are then reported as 0). on_metrics, when set, sees
/// each metrics row as it is produced (so partial runs leave artifacts).
RunArtifact train_cawr(const Dataset& data, const TaskEncoding& enc, const TrainConfig& config,
                       Env* eval_env,
                       const std::function<void(const MetricsRow&)>& on_metrics = {});

}  // namespace cawr
