#include "cawr/policy_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "cawr/errors.hpp"

namespace cawr {

PolicySnapshot::PolicySnapshot(Mlp net, double sigma, PolicyDist dist)
    : mean_net(std::move(net)), sigma(sigma), distribution(dist) {
  if (!(sigma > 0.0)) throw ConfigError("policy sigma must be positive");
}

AdvantageWeight AdvantageWeight::from_scheme(const PriorityScheme& scheme,
                                             const AdvantageStats& stats, double lambda,
                                             double w_max) {
  AdvantageWeight w;
  w.lambda = lambda;
  w.w_max = w_max;
  w.c1 = 0.0;
  w.c2 = 1.0 / lambda;
  switch (scheme.kind) {
    case PriorityKind::ExpNormal:
      if (stats.stddev > 0.0) {
        w.c1 = stats.mean;
        w.c2 = 1.0 / (lambda * stats.stddev);
      }
      break;
    case PriorityKind::ExpQuantile:
      if (stats.stddev > 0.0) {
        w.c1 = stats.quantile;
        w.c2 = 1.0 / (lambda * stats.stddev);
      }
      break;
    default:
      break;  // standard centering
  }
  return w;
}

double weight(const AdvantageWeight& w, double advantage) {
  const double arg = std::min(w.c2 * (advantage - w.c1), 710.0);  // exp() overflow guard
  return std::min(std::exp(arg), w.w_max);
}

PolicyLossResult policy_loss(const PolicySnapshot& policy, const RobustLoss& loss,
                             const Dataset& data, const TaskEncoding& enc,
                             std::span<const std::size_t> batch, std::span<const double> weights) {
  if (batch.empty()) throw ValidationError("policy_loss: empty batch");
  if (batch.size() != weights.size()) throw ValidationError("policy_loss: weight count mismatch");

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double scale = 1.0 / (2.0 * policy.sigma * policy.sigma);

  PolicyLossResult out;
  out.grad.assign(policy.mean_net.param_count(), 0.0);
  Mlp::Tape tape;
  std::vector<double> dmu;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Transition& t = data[batch[k]];
    const auto input = enc.encode_state(t.state);
    const auto target = enc.policy_target(t.action);
    const auto mu = policy.mean_net.forward(input, tape);
    if (target.size() != mu.size()) throw ValidationError("policy_loss: target dimension mismatch");

    const double w = weights[k] * scale * inv_n;
    dmu.assign(mu.size(), 0.0);
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double u = target[j] - mu[j];
      out.loss += w * loss_value(loss, u);
      dmu[j] = -w * loss_grad(loss, u);  // d/dmu f(a - mu) = -f'(u)
    }
    policy.mean_net.backward(tape, dmu, out.grad);
  }
  return out;
}

double policy_step(PolicySnapshot& policy, const RobustLoss& loss, const Dataset& data,
                   const TaskEncoding& enc, std::span<const std::size_t> batch,
                   std::span<const double> weights, double lr) {
  PolicyLossResult result = policy_loss(policy, loss, data, enc, batch, weights);
  policy.mean_net.sgd_step(result.grad, lr);
  return result.loss;
}

EvalResult evaluate_policy(const PolicySnapshot& policy, Env& env, const TaskEncoding& enc,
                           std::size_t n_episodes, std::uint64_t seed, double gamma,
                           bool stochastic) {
  if (n_episodes == 0) throw ValidationError("evaluate_policy: need at least one episode");
  Rng rng(seed);
  EvalResult out;
  out.returns.reserve(n_episodes);
  std::vector<double> discounted;
  discounted.reserve(n_episodes);

  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    std::vector<double> state = env.reset(rng);
    double total = 0.0, disc = 0.0, g = 1.0;
    for (std::size_t t = 0; t < env.horizon(); ++t) {
      const auto input = enc.encode_state(state);
      std::vector<double> mu = policy.mean(input);
      if (stochastic) {
        for (double& m : mu) m += policy.sigma * rng.normal();
      }
      const auto action = enc.decode_action(mu);
      const Env::Step step = env.step(action, rng);
      total += step.reward;
      disc += g * step.reward;
      g *= gamma;
      state = step.state;
      if (step.done) break;
    }
    out.returns.push_back(total);
    discounted.push_back(disc);
  }

  const auto mean_std = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::pair<double, double>{m, std::sqrt(ss / static_cast<double>(xs.size()))};
  };
  std::tie(out.mean_return, out.std_return) = mean_std(out.returns);
  std::tie(out.mean_discounted, out.std_discounted) = mean_std(discounted);
  return out;
}

std::vector<double> best_so_far(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("best_so_far: empty history");
  std::vector<double> out(scores.size());
  double best = scores[0];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    best = std::max(best, scores[i]);
    out[i] = best;
  }
  return out;
}

ValueNets make_value_nets(const TaskEncoding& enc, const std::vector<std::size_t>& hidden,
                          double tau, double soft_coeff, Rng& rng) {
  std::vector<std::size_t> q_layers{enc.q_input_dim()};
  q_layers.insert(q_layers.end(), hidden.begin(), hidden.end());
  q_layers.push_back(1);
  std::vector<std::size_t> v_layers{enc.v_input_dim()};
  v_layers.insert(v_layers.end(), hidden.begin(), hidden.end());
  v_layers.push_back(1);
  Mlp q = Mlp::random_init(q_layers, rng);
  Mlp v = Mlp::random_init(v_layers, rng);
  return ValueNets(std::move(q), std::move(v), tau, soft_coeff);
}

PolicySnapshot make_policy(const TaskEncoding& enc, const std::vector<std::size_t>& hidden,
                           double sigma, Rng& rng) {
  std::vector<std::size_t> layers{enc.policy_input_dim()};
  layers.insert(layers.end(), hidden.begin(), hidden.end());
  layers.push_back(enc.policy_output_dim());
  const PolicyDist dist = PolicyDist::GaussianFixedStd;
  return PolicySnapshot(Mlp::random_init(layers, rng), sigma, dist);
}

namespace {

double normalized_score_value(double j, double j_random, double j_expert) {
  return (j - j_random) / (j_expert - j_random) * 100.0;
}

}  // namespace

RunArtifact train_cawr(const Dataset& data, const TaskEncoding& enc, const TrainConfig& config,
                       Env* eval_env, const std::function<void(const MetricsRow&)>& on_metrics) {
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  if (config.score_j_expert == config.score_j_random) {
    throw ConfigError("score endpoints must differ");
  }

  Rng init_rng = Rng::substream(config.seed, 0);
  Rng sample_rng = Rng::substream(config.seed, 1);

  ValueNets nets = make_value_nets(enc, config.value_hidden, config.tau,
                                   config.soft_target_coeff, init_rng);
  PolicySnapshot policy = make_policy(enc, config.policy_hidden, config.sigma, init_rng);
  if (config.loss.kind == LossKind::L1) policy.distribution = PolicyDist::LaplaceFixedScale;

  ReplayBuffer buffer(data.size(), config.scheme);

  std::vector<MetricsRow> metrics;
  double best_score = -std::numeric_limits<double>::infinity();
  double last_value_loss = std::numeric_limits<double>::quiet_NaN();
  double last_q_loss = last_value_loss;
  double last_policy_loss = last_value_loss;
  double last_mean_weight = last_value_loss;

  const auto evaluate_now = [&](std::size_t iteration) {
    MetricsRow row;
    row.iteration = iteration;
    if (eval_env != nullptr) {
      const EvalResult eval =
          evaluate_policy(policy, *eval_env, enc, config.eval_episodes,
                          Rng::substream(config.seed, 1000003 + iteration).next_u64(),
                          config.gamma, config.eval_stochastic);
      row.mean_return = eval.mean_return;
      row.std_return = eval.std_return;
    }
    row.score = normalized_score_value(row.mean_return, config.score_j_random, config.score_j_expert);
    best_score = std::max(best_score, row.score);
    row.score_k = best_score;
    row.value_loss = last_value_loss;
    row.q_loss = last_q_loss;
    row.policy_loss = last_policy_loss;
    row.mean_weight = last_mean_weight;
    row.priority_entropy = buffer.priority_entropy();
    metrics.push_back(row);
    if (on_metrics) on_metrics(row);
  };

  const std::size_t n = config.batch_size;
  std::vector<double> advantages(2 * n);
  std::vector<double> d2_weights(n);

  for (std::size_t k = 0; k < config.iterations; ++k) {
    nets.begin_iteration();

    const std::vector<std::size_t> d1 = buffer.sample_uniform(n, sample_rng);
    const std::vector<std::size_t> d2 = buffer.sample_prioritized(n, sample_rng);

    last_value_loss = update_value(nets, data, enc, d1, config.lr.value);
    last_q_loss = update_q(nets, data, enc, d1, config.gamma, config.lr.q);

    std::vector<std::size_t> joint(d1);
    joint.insert(joint.end(), d2.begin(), d2.end());
    for (std::size_t i = 0; i < joint.size(); ++i) {
      const Transition& t = data[joint[i]];
      advantages[i] = advantage(nets, enc, t.state, t.action);
    }

    AdvantageStats stats = batch_stats(advantages, config.scheme.quantile_level);
    const AdvantageWeight w_params =
        AdvantageWeight::from_scheme(config.scheme, stats, config.lambda, config.w_max);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < joint.size(); ++i) {
      const double w = weight(w_params, advantages[i]);
      weight_sum += w;
      if (i >= n) d2_weights[i - n] = w;
    }
    last_mean_weight = weight_sum / static_cast<double>(joint.size());

    RobustLoss iter_loss = config.loss;
    if (config.tighten_strength > 0.0 && config.iterations > 1) {
      const double progress = static_cast<double>(k) / static_cast<double>(config.iterations - 1);
      iter_loss = tighten_schedule(config.loss, progress, config.tighten_strength);
    }
    last_policy_loss = policy_step(policy, iter_loss, data, enc, d2, d2_weights, config.lr.policy);

    buffer.update_priorities(joint, advantages, stats);
    nets.soft_update_q_target();

    if (!std::isfinite(last_value_loss) || !std::isfinite(last_q_loss) ||
        !std::isfinite(last_policy_loss)) {
      throw TrainingDiverged("non-finite loss at iteration " + std::to_string(k),
                             static_cast<long long>(k));
    }

    if (config.eval_interval > 0 && (k + 1) % config.eval_interval == 0) {
      evaluate_now(k + 1);
    }
  }

  if (metrics.empty() || metrics.back().iteration != config.iterations) {
    evaluate_now(config.iterations);
  }

  double good = 0.0;
  for (const Transition& t : data) {
    if (advantage(nets, enc, t.state, t.action) > config.advantage_threshold) good += 1.0;
  }

  RunArtifact artifact{std::move(policy), std::move(nets), std::move(metrics),
                       good / static_cast<double>(data.size())};
  return artifact;
}

}  // namespace cawr
