#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cawr/priority_replay.hpp"
#include "cawr/robust_loss.hpp"
#include "cawr/tabular_mdp.hpp"
#include "cawr/tasks.hpp"

namespace cawr::oracle {

/// Closed-form optimum of advantage-weighted regression under a KL
/// constraint: pi(a) proportional to pi_beta(a) * exp(A(a) / lambda), with
/// exact renormalization (max-subtracted exponentials).
std::vector<double> constrained_optimal_row(const std::vector<double>& pi_beta,
                                            const std::vector<double>& advantages, double lambda);
DiscretePolicy constrained_optimal_policy(const DiscretePolicy& pi_beta,
                                          const std::vector<std::vector<double>>& advantages,
                                          double lambda);

/// Entropy-regularized optimum with the behavior factor removed:
/// pi(a) proportional to exp(A(a) / lambda).
std::vector<double> unbiased_optimal_row(const std::vector<double>& advantages, double lambda);
DiscretePolicy unbiased_optimal_policy(const std::vector<std::vector<double>>& advantages,
                                       double lambda);

/// Penalized objective E_pi[A] - lambda * KL(pi || pi_beta) whose argmax the
/// closed form claims; -inf where pi puts mass outside pi_beta's support.
double awr_objective(const std::vector<double>& pi, const std::vector<double>& pi_beta,
                     const std::vector<double>& advantages, double lambda);

/// Independent maximizer of awr_objective by brute simplex search
/// (golden-section for 2 actions, two-stage grid for 3).
std::vector<double> awr_objective_argmax(const std::vector<double>& pi_beta,
                                         const std::vector<double>& advantages, double lambda);

/// Lower bound on the divergence between the constrained and unbiased
/// optima: KL(pi_star || pi_star_beta) >= H(pi_star, pi_beta) - H(pi_beta, pi_star).
/// Infinite sides (zero-support behaviors) report holds = true.
struct KlBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs
  bool holds = false;
};
KlBoundResult kl_lower_bound_check(const std::vector<double>& pi_beta,
                                   const std::vector<double>& advantages, double lambda);

/// Bias of the weighted robust regression optimum under an
/// epsilon-contaminated 1-D behavior mixture. mu_star minimizes the mixture
/// objective, mu_plus the good-component objective; both by grid scan plus
/// golden-section to 1e-8 over noise-free quadrature (point masses exactly,
/// Gaussians by kink-split Gauss-Legendre). bound is the closed-form
/// L2 bound eps * E_poor[w |a - mu_plus|] / E_mix[w]; bound_general the
/// Hessian-expectation form evaluated over the bracketing interval (only
/// where f'' exists there).
struct BiasBoundResult {
  double mu_star = 0.0;
  double mu_plus = 0.0;
  double bias = 0.0;
  double bound = 0.0;
  double bound_general = 0.0;
  bool has_general_bound = false;
  bool applicable = true;  // support fits in the convex region
  bool unimodal = true;
  std::vector<double> minima;  // populated when not unimodal
  bool holds = false;          // bias <= bound (meaningful for the L2 kind)
};
BiasBoundResult bias_bound_check(const ContinuousMixture& mixture,
                                 const std::function<double(double)>& weight_fn,
                                 const RobustLoss& loss);

/// Gap between the finite-difference gradient of the weighted Gaussian
/// negative log-likelihood and the analytic gradient of the weighted scaled
/// L2 objective (they agree up to a mu-independent constant). Returns the
/// max absolute per-coordinate difference.
double gaussian_l2_gradient_gap(const std::vector<double>& action, const std::vector<double>& mu,
                                double sigma, double weight);

/// Resampled-behavior equivalence and improvement on an empirical MDP:
/// (a) the two decompositions of the resampled constraint produce the same
/// closed-form optimizer (TV <= 1e-8), and (b) searching over (lambda, h)
/// cannot do worse than lambda alone with h == 1.
struct ResamplingReport {
  double max_optimizer_tv = 0.0;
  double best_return_with_h = 0.0;
  double best_return_base = 0.0;
  double margin = 0.0;  // best_with_h - best_base
  std::vector<std::size_t> skipped_states;  // never observed in the dataset
  bool holds = false;
};
ResamplingReport resampling_check(const EmpiricalMdp& emp,
                                  const std::vector<PriorityScheme>& schemes,
                                  const std::vector<double>& lambda_grid);

/// One entry of the verification suite.
struct CheckReport {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string details;
  double seconds = 0.0;
};

struct TheoremSuiteOptions {
  std::uint64_t seed = 20260808;
  int closed_form_instances = 100;
  int kl_instances = 1000;
  int bias_instances = 1000;
  int l2_equivalence_probes = 10000;
  int resampling_instances = 20;
};

struct TheoremSuiteReport {
  std::vector<CheckReport> checks;
  bool all_pass() const;
};

/// Runs every closed-form and bound check on randomized instances.
TheoremSuiteReport run_theorem_suite(const TheoremSuiteOptions& options = {});

}  // namespace cawr::oracle
