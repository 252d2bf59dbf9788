#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "cawr/errors.hpp"
#include "cawr/oracle.hpp"
#include "cawr/rng.hpp"

namespace cawr::oracle {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  // Dirichlet(1) via normalized exponentials; entries stay strictly positive.
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckReport check_closed_form(Rng& rng, int instances) {
  const auto start = Clock::now();
  const double lambdas[] = {0.2, 1.0, 5.0};
  double max_tv = 0.0;
  for (int i = 0; i < instances; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_index(2));
    const std::vector<double> pi_beta = random_simplex(rng, n);
    std::vector<double> adv(n);
    for (double& a : adv) a = rng.uniform(-2.0, 2.0);
    const double lambda = lambdas[i % 3];

    const std::vector<double> closed = constrained_optimal_row(pi_beta, adv, lambda);
    const std::vector<double> searched = awr_objective_argmax(pi_beta, adv, lambda);
    double tv = 0.0;
    for (std::size_t a = 0; a < n; ++a) tv += std::abs(closed[a] - searched[a]);
    max_tv = std::max(max_tv, 0.5 * tv);
  }
  CheckReport report;
  report.name = "closed_form_policy";
  report.margin = 1e-3 - max_tv;
  report.pass = max_tv <= 1e-3;
  report.seconds = seconds_since(start);
  report.details = "max total variation " + format_double(max_tv) + " over " +
                   std::to_string(instances) + " simplex searches";
  return report;
}

CheckReport check_kl_lower_bound(Rng& rng, int instances) {
  const auto start = Clock::now();
  const double lambdas[] = {0.2, 1.0, 5.0};
  double min_margin = std::numeric_limits<double>::infinity();
  bool all_hold = true;
  for (int i = 0; i < instances; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_index(7));
    const std::vector<double> pi_beta = random_simplex(rng, n);
    std::vector<double> adv(n);
    for (double& a : adv) a = rng.uniform(-3.0, 3.0);
    const KlBoundResult r = kl_lower_bound_check(pi_beta, adv, lambdas[i % 3]);
    all_hold = all_hold && r.holds;
    if (std::isfinite(r.margin)) min_margin = std::min(min_margin, r.margin);
  }

  // Degeneracy: as the behavior concentrates on the poor action, the
  // divergence from the unbiased optimum grows without bound.
  const std::vector<double> adv{1.0, -1.0};
  double previous = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  double first = 0.0, last = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const double good_mass = std::pow(10.0, -k);
    const KlBoundResult r = kl_lower_bound_check({good_mass, 1.0 - good_mass}, adv, 1.0);
    if (k == 1) first = r.lhs;
    last = r.lhs;
    monotone = monotone && r.lhs > previous;
    previous = r.lhs;
  }
  const bool grows = monotone && last > first + 1.0;

  CheckReport report;
  report.name = "kl_lower_bound";
  report.margin = min_margin;
  report.pass = all_hold && min_margin >= -1e-12 && grows;
  report.seconds = seconds_since(start);
  report.details = "min margin " + format_double(min_margin) + " over " +
                   std::to_string(instances) + " instances; degeneracy lhs " +
                   format_double(first) + " -> " + format_double(last) +
                   (monotone ? " (monotone)" : " (NOT monotone)");
  return report;
}

struct BiasInstance {
  ContinuousMixture mixture;
  std::function<double(double)> weight_fn;
  bool point_mass = false;
};

BiasInstance random_bias_instance(Rng& rng, bool point_mass) {
  // Corruption sits well away from the good component, mirroring the poor
  // explorations the bounds are about; weights are bounded and favor the
  // good side the way advantage weights do.
  BiasInstance inst;
  inst.point_mass = point_mass;
  const double good_mean = rng.uniform(-1.0, 1.0);
  const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
  const double distance = rng.uniform(2.0, 6.0);
  const double poor_mean = good_mean + side * distance;
  inst.mixture.epsilon = rng.uniform(0.05, 0.45);
  if (point_mass) {
    inst.mixture.good = PointAction{{good_mean}};
    inst.mixture.poor = PointAction{{poor_mean}};
  } else {
    inst.mixture.good = GaussianAction{{good_mean}, rng.uniform(0.05, 0.3)};
    inst.mixture.poor = GaussianAction{{poor_mean}, rng.uniform(0.05, 0.3)};
  }
  const double w_lo = rng.uniform(0.5, 1.0);
  const double w_hi = w_lo * rng.uniform(1.0, 3.0);
  const double growth = rng.uniform(0.5, 2.0);
  const double mid = 0.5 * (good_mean + poor_mean);
  const double toward_good = -side;  // weights increase toward the good component
  inst.weight_fn = [=](double a) {
    const double t = 1.0 / (1.0 + std::exp(-growth * toward_good * (a - mid)));
    return w_lo + (w_hi - w_lo) * t;
  };
  return inst;
}

CheckReport check_bias_bound(Rng& rng, int instances) {
  const auto start = Clock::now();
  int l2_violations = 0, l1_comparison_violations = 0, l1_point_violations = 0;
  int skipped_multimodal = 0;
  double min_slack = std::numeric_limits<double>::infinity();

  for (int i = 0; i < instances; ++i) {
    const BiasInstance inst = random_bias_instance(rng, i % 2 == 0);
    const BiasBoundResult l2 = bias_bound_check(inst.mixture, inst.weight_fn, RobustLoss::l2());
    if (!l2.holds) ++l2_violations;
    min_slack = std::min(min_slack, l2.bound - l2.bias);

    const BiasBoundResult l1 = bias_bound_check(inst.mixture, inst.weight_fn, RobustLoss::l1());
    if (!l1.unimodal || !l2.unimodal) {
      ++skipped_multimodal;
    } else if (l1.bias > l2.bias + 1e-7) {
      ++l1_comparison_violations;
    }
    if (inst.point_mass && inst.mixture.epsilon < 0.5 && l1.bias > 1e-6) {
      ++l1_point_violations;
    }
  }

  // The two-point instance where the L2 bound is tight.
  ContinuousMixture tight;
  tight.good = PointAction{{1.0}};
  tight.poor = PointAction{{-1.0}};
  tight.epsilon = 0.25;
  const auto unit_weight = [](double) { return 1.0; };
  const BiasBoundResult tight_l2 = bias_bound_check(tight, unit_weight, RobustLoss::l2());
  const BiasBoundResult tight_l1 = bias_bound_check(tight, unit_weight, RobustLoss::l1());
  // Equality holds exactly in closed form; numerically both sides carry the
  // 1e-8 optimizer tolerance through mu_plus.
  const bool tight_ok = std::abs(tight_l2.bias - 0.5) <= 1e-7 &&
                        std::abs(tight_l2.bound - 0.5) <= 1e-7 && tight_l1.bias <= 1e-7;

  CheckReport report;
  report.name = "bias_bound";
  report.margin = min_slack;
  report.pass = l2_violations == 0 && l1_comparison_violations == 0 && l1_point_violations == 0 &&
                tight_ok;
  report.seconds = seconds_since(start);
  std::ostringstream details;
  details << instances << " mixtures: L2 bound violations " << l2_violations
          << ", L1>L2 comparisons " << l1_comparison_violations << ", nonzero point-mass L1 biases "
          << l1_point_violations << ", multimodal skips " << skipped_multimodal
          << "; tight instance bias " << format_double(tight_l2.bias) << " = bound "
          << format_double(tight_l2.bound);
  report.details = details.str();
  return report;
}

CheckReport check_l2_equivalence(Rng& rng, int probes) {
  const auto start = Clock::now();
  double max_gap = 0.0;
  for (int i = 0; i < probes; ++i) {
    const std::size_t d = 1 + rng.uniform_index(3);
    std::vector<double> a(d), mu(d);
    for (std::size_t j = 0; j < d; ++j) {
      a[j] = rng.uniform(-1.0, 1.0);
      mu[j] = rng.uniform(-1.0, 1.0);
    }
    const double sigma = rng.uniform(0.5, 2.0);
    const double w = rng.uniform(0.1, 5.0);
    max_gap = std::max(max_gap, gaussian_l2_gradient_gap(a, mu, sigma, w));
  }
  CheckReport report;
  report.name = "gaussian_l2_equivalence";
  report.margin = 1e-10 - max_gap;
  report.pass = max_gap <= 1e-10;
  report.seconds = seconds_since(start);
  report.details = "max gradient gap " + format_double(max_gap) + " over " +
                   std::to_string(probes) + " probes";
  return report;
}

TabularMDP random_chain_world(Rng& rng, std::size_t n_states) {
  // A 1 x n grid: action 0 steps left, action 1 steps right, with a random
  // slip probability of moving the other way; rewards are random per (s,a).
  const std::size_t na = 2;
  const double slip = rng.uniform(0.0, 0.3);
  std::vector<double> kernel(n_states * na * n_states, 0.0);
  std::vector<double> rewards(n_states * na);
  for (std::size_t s = 0; s < n_states; ++s) {
    const std::size_t left = s > 0 ? s - 1 : s;
    const std::size_t right = s + 1 < n_states ? s + 1 : s;
    kernel[(s * na + 0) * n_states + left] += 1.0 - slip;
    kernel[(s * na + 0) * n_states + right] += slip;
    kernel[(s * na + 1) * n_states + right] += 1.0 - slip;
    kernel[(s * na + 1) * n_states + left] += slip;
    rewards[s * na + 0] = rng.uniform(-1.0, 1.0);
    rewards[s * na + 1] = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> d0(n_states, 0.0);
  d0[0] = 1.0;
  return TabularMDP(n_states, na, std::move(kernel), std::move(rewards), 0.9, std::move(d0));
}

CheckReport check_resampling(Rng& rng, int instances) {
  const auto start = Clock::now();
  double min_margin = std::numeric_limits<double>::infinity();
  double max_tv = 0.0;
  bool all_hold = true;

  std::vector<PriorityScheme> schemes(4);
  schemes[0].kind = PriorityKind::ExpStandard;
  schemes[1].kind = PriorityKind::ExpNormal;
  schemes[2].kind = PriorityKind::Odpr;
  schemes[3].kind = PriorityKind::Aw;
  for (PriorityScheme& s : schemes) s.lambda = 0.5;
  const std::vector<double> lambda_grid{0.1, 0.3, 1.0, 3.0};

  for (int i = 0; i < instances; ++i) {
    const TabularMDP world = random_chain_world(rng, 5);
    DiscreteMixture behavior;
    behavior.good.resize(world.n_states());
    behavior.poor.resize(world.n_states());
    for (std::size_t s = 0; s < world.n_states(); ++s) {
      behavior.good[s] = random_simplex(rng, world.n_actions());
      behavior.poor[s] = random_simplex(rng, world.n_actions());
    }
    behavior.epsilon = rng.uniform(0.1, 0.9);

    const Dataset data = generate_dataset(world, behavior, 400, 10, rng.next_u64());
    const EmpiricalMdp emp = empirical_mdp(data, UniformBinner::identity(world.n_states()),
                                           UniformBinner::identity(world.n_actions()), 0.9);
    const ResamplingReport r = resampling_check(emp, schemes, lambda_grid);
    all_hold = all_hold && r.holds;
    min_margin = std::min(min_margin, r.margin);
    max_tv = std::max(max_tv, r.max_optimizer_tv);
  }

  CheckReport report;
  report.name = "resampling_improvement";
  report.margin = min_margin;
  report.pass = all_hold && min_margin >= -1e-9 && max_tv <= 1e-8;
  report.seconds = seconds_since(start);
  report.details = "min improvement margin " + format_double(min_margin) +
                   ", max optimizer TV " + format_double(max_tv) + " over " +
                   std::to_string(instances) + " empirical worlds";
  return report;
}

}  // namespace

TheoremSuiteReport run_theorem_suite(const TheoremSuiteOptions& options) {
  TheoremSuiteReport report;
  Rng rng(options.seed);
  report.checks.push_back(check_closed_form(rng, options.closed_form_instances));
  report.checks.push_back(check_kl_lower_bound(rng, options.kl_instances));
  report.checks.push_back(check_bias_bound(rng, options.bias_instances));
  report.checks.push_back(check_l2_equivalence(rng, options.l2_equivalence_probes));
  report.checks.push_back(check_resampling(rng, options.resampling_instances));
  return report;
}

}  // namespace cawr::oracle
