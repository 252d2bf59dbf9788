#pragma once

// Independent reference computations used by the tests. Everything here is
// deliberately written against the math, not the library implementation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "cawr/rng.hpp"
#include "cawr/tabular_mdp.hpp"

namespace testsupport {

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Finite-difference gradient of a scalar function of a parameter vector.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> params,
    double h = 1e-6) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double original = params[i];
    params[i] = original + h;
    const double up = f(params);
    params[i] = original - h;
    const double down = f(params);
    params[i] = original;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Expectile of a finite distribution by bisection on the first-order
/// condition tau * E[(t - e)+] = (1 - tau) * E[(e - t)+].
inline double expectile_of(const std::vector<double>& values, const std::vector<double>& probs,
                           double tau) {
  const auto imbalance = [&](double e) {
    double up = 0.0, down = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] > e) up += probs[i] * (values[i] - e);
      if (values[i] < e) down += probs[i] * (e - values[i]);
    }
    return tau * up - (1.0 - tau) * down;
  };
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (imbalance(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Monte-Carlo estimate of V(d0) for a policy: mean discounted return and
/// its standard error over n_episodes truncated at max_steps.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
inline McEstimate monte_carlo_return(const cawr::TabularMDP& mdp,
                                     const cawr::DiscretePolicy& policy, std::size_t n_episodes,
                                     std::size_t max_steps, std::uint64_t seed) {
  cawr::Rng rng(seed);
  std::vector<double> returns;
  returns.reserve(n_episodes);
  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    std::size_t s = rng.categorical(mdp.initial_dist());
    double total = 0.0, discount = 1.0;
    for (std::size_t t = 0; t < max_steps; ++t) {
      if (mdp.is_terminal(s)) break;
      const std::size_t a = rng.categorical(policy[s]);
      total += discount * mdp.r(s, a);
      discount *= mdp.gamma();
      std::vector<double> next(mdp.n_states());
      for (std::size_t s2 = 0; s2 < mdp.n_states(); ++s2) next[s2] = mdp.p(s, a, s2);
      s = rng.categorical(next);
    }
    returns.push_back(total);
  }
  McEstimate est;
  for (double r : returns) est.mean += r;
  est.mean /= static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - est.mean) * (r - est.mean);
  est.std_error = std::sqrt(ss / static_cast<double>(returns.size() - 1)) /
                  std::sqrt(static_cast<double>(returns.size()));
  return est;
}

/// Minimizer of sum_i w_i * (x_i - m)^2 -> weighted mean.
inline double weighted_mean(const std::vector<double>& xs, const std::vector<double>& ws) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += ws[i] * xs[i];
    den += ws[i];
  }
  return num / den;
}

/// Minimizer of sum_i w_i * |x_i - m| -> weighted median (lower median).
inline double weighted_median(std::vector<double> xs, std::vector<double> ws) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  const double total = std::accumulate(ws.begin(), ws.end(), 0.0);
  double acc = 0.0;
  for (std::size_t k : order) {
    acc += ws[k];
    if (acc >= 0.5 * total) return xs[k];
  }
  return xs[order.back()];
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities.
inline double chi_square_statistic(const std::vector<std::size_t>& counts,
                                   const std::vector<double>& probs) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = n * probs[i];
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

}  // namespace testsupport
