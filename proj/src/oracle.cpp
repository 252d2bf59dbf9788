#include "cawr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cawr/errors.hpp"
#include "cawr/quadrature.hpp"

namespace cawr::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> softmax_from_logits(const std::vector<double>& logits) {
  double m = -kInf;
  for (double z : logits) m = std::max(m, z);
  std::vector<double> p(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    p[a] = std::isinf(logits[a]) ? 0.0 : std::exp(logits[a] - m);
    sum += p[a];
  }
  for (double& x : p) x /= sum;
  return p;
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace

std::vector<double> constrained_optimal_row(const std::vector<double>& pi_beta,
                                            const std::vector<double>& advantages, double lambda) {
  require_lambda(lambda);
  if (pi_beta.size() != advantages.size()) throw ValidationError("row size mismatch");
  std::vector<double> logits(pi_beta.size());
  for (std::size_t a = 0; a < pi_beta.size(); ++a) {
    logits[a] = pi_beta[a] > 0.0 ? std::log(pi_beta[a]) + advantages[a] / lambda : -kInf;
  }
  return softmax_from_logits(logits);
}

DiscretePolicy constrained_optimal_policy(const DiscretePolicy& pi_beta,
                                          const std::vector<std::vector<double>>& advantages,
                                          double lambda) {
  if (pi_beta.size() != advantages.size()) throw ValidationError("state count mismatch");
  DiscretePolicy out(pi_beta.size());
  for (std::size_t s = 0; s < pi_beta.size(); ++s) {
    out[s] = constrained_optimal_row(pi_beta[s], advantages[s], lambda);
  }
  return out;
}

std::vector<double> unbiased_optimal_row(const std::vector<double>& advantages, double lambda) {
  require_lambda(lambda);
  std::vector<double> logits(advantages.size());
  for (std::size_t a = 0; a < advantages.size(); ++a) logits[a] = advantages[a] / lambda;
  return softmax_from_logits(logits);
}

DiscretePolicy unbiased_optimal_policy(const std::vector<std::vector<double>>& advantages,
                                       double lambda) {
  DiscretePolicy out(advantages.size());
  for (std::size_t s = 0; s < advantages.size(); ++s) {
    out[s] = unbiased_optimal_row(advantages[s], lambda);
  }
  return out;
}

double awr_objective(const std::vector<double>& pi, const std::vector<double>& pi_beta,
                     const std::vector<double>& advantages, double lambda) {
  double value = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] == 0.0) continue;
    if (pi_beta[a] == 0.0) return -kInf;
    value += pi[a] * advantages[a] - lambda * pi[a] * std::log(pi[a] / pi_beta[a]);
  }
  return value;
}

std::vector<double> awr_objective_argmax(const std::vector<double>& pi_beta,
                                         const std::vector<double>& advantages, double lambda) {
  const std::size_t n = pi_beta.size();
  if (n == 2) {
    const auto objective = [&](double t) {
      return -awr_objective({t, 1.0 - t}, pi_beta, advantages, lambda);
    };
    const double t = golden_section_min(objective, 0.0, 1.0, 1e-10);
    return {t, 1.0 - t};
  }
  if (n == 3) {
    const auto value = [&](double t1, double t2) {
      return awr_objective({t1, t2, 1.0 - t1 - t2}, pi_beta, advantages, lambda);
    };
    // Coarse simplex grid, then a fine local grid around the best cell.
    double best1 = 1.0 / 3.0, best2 = 1.0 / 3.0;
    double best = -kInf;
    const double coarse = 0.005;
    for (double t1 = 0.0; t1 <= 1.0 + 1e-12; t1 += coarse) {
      for (double t2 = 0.0; t2 + t1 <= 1.0 + 1e-12; t2 += coarse) {
        const double v = value(t1, std::min(t2, 1.0 - t1));
        if (v > best) {
          best = v;
          best1 = t1;
          best2 = std::min(t2, 1.0 - t1);
        }
      }
    }
    const double fine = 1e-4;
    const double lo1 = std::max(0.0, best1 - coarse), hi1 = std::min(1.0, best1 + coarse);
    const double lo2raw = std::max(0.0, best2 - coarse), hi2raw = best2 + coarse;
    for (double t1 = lo1; t1 <= hi1 + 1e-12; t1 += fine) {
      for (double t2 = lo2raw; t2 <= std::min(hi2raw, 1.0 - t1) + 1e-12; t2 += fine) {
        const double v = value(t1, std::min(t2, 1.0 - t1));
        if (v > best) {
          best = v;
          best1 = t1;
          best2 = std::min(t2, 1.0 - t1);
        }
      }
    }
    return {best1, best2, 1.0 - best1 - best2};
  }
  throw ValidationError("simplex search supports 2 or 3 actions");
}

KlBoundResult kl_lower_bound_check(const std::vector<double>& pi_beta,
                                   const std::vector<double>& advantages, double lambda) {
  require_lambda(lambda);
  const std::size_t n = pi_beta.size();
  if (advantages.size() != n) throw ValidationError("row size mismatch");

  const std::vector<double> pi_star = unbiased_optimal_row(advantages, lambda);
  const std::vector<double> pi_star_beta = constrained_optimal_row(pi_beta, advantages, lambda);

  KlBoundResult out;
  // lhs = KL(pi_star || pi_star_beta)
  for (std::size_t a = 0; a < n; ++a) {
    if (pi_star[a] == 0.0) continue;
    if (pi_star_beta[a] == 0.0) {
      out.lhs = kInf;
      break;
    }
    out.lhs += pi_star[a] * std::log(pi_star[a] / pi_star_beta[a]);
  }
  // rhs = H(pi_star, pi_beta) - H(pi_beta, pi_star)
  double cross_sb = 0.0;  // -sum pi_star log pi_beta
  double cross_bs = 0.0;  // -sum pi_beta log pi_star
  for (std::size_t a = 0; a < n; ++a) {
    if (pi_star[a] > 0.0) {
      cross_sb += pi_beta[a] > 0.0 ? -pi_star[a] * std::log(pi_beta[a]) : kInf;
    }
    if (pi_beta[a] > 0.0) {
      cross_bs += pi_star[a] > 0.0 ? -pi_beta[a] * std::log(pi_star[a]) : kInf;
    }
  }
  out.rhs = cross_sb - cross_bs;
  if (std::isinf(out.lhs) || std::isinf(out.rhs)) {
    out.margin = kInf;
    out.holds = true;
    return out;
  }
  out.margin = out.lhs - out.rhs;
  out.holds = out.margin >= -1e-12;
  return out;
}

namespace {

struct ComponentView {
  bool is_point = false;
  double atom = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

ComponentView component_view(const ActionDist& dist) {
  ComponentView v;
  if (const auto* point = std::get_if<PointAction>(&dist)) {
    v.is_point = true;
    v.atom = point->action.at(0);
  } else {
    const auto& g = std::get<GaussianAction>(dist);
    v.mean = g.mean.at(0);
    v.stddev = g.stddev;
  }
  return v;
}

/// E[g(a)] over one mixture component; Gaussians integrate by composite
/// Gauss-Legendre split at the integrand kink so nonsmooth losses stay
/// machine accurate.
class ComponentExpectation {
 public:
  ComponentExpectation() : gl_(gauss_legendre(24)) {}

  double expect(const ComponentView& c, const std::function<double(double)>& g,
                double split_at) const {
    if (c.is_point) return g(c.atom);
    const double lo = c.mean - 10.0 * c.stddev;
    const double hi = c.mean + 10.0 * c.stddev;
    const double density_scale = 1.0 / (c.stddev * std::sqrt(2.0 * 3.14159265358979323846));
    const auto integrand = [&](double a) {
      const double z = (a - c.mean) / c.stddev;
      return g(a) * density_scale * std::exp(-0.5 * z * z);
    };
    // Panels of width ~stddev, with an extra boundary at the kink.
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (int i = 1; i < 20; ++i) cuts.push_back(lo + (hi - lo) * i / 20.0);
    cuts.push_back(hi);
    if (split_at > lo && split_at < hi) cuts.push_back(split_at);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) sum += integrate(integrand, cuts[i], cuts[i + 1], gl_);
    }
    return sum;
  }

 private:
  Quadrature gl_;
};

}  // namespace

BiasBoundResult bias_bound_check(const ContinuousMixture& mixture,
                                 const std::function<double(double)>& weight_fn,
                                 const RobustLoss& loss) {
  if (!(mixture.epsilon >= 0.0 && mixture.epsilon <= 1.0)) {
    throw ConfigError("mixture epsilon must lie in [0, 1]");
  }
  const ComponentView good = component_view(mixture.good);
  const ComponentView poor = component_view(mixture.poor);
  const double eps = mixture.epsilon;
  const ComponentExpectation quad;

  const auto mixture_objective = [&](double mu) {
    const auto g = [&](double a) { return weight_fn(a) * loss_value(loss, a - mu); };
    double value = (1.0 - eps) * quad.expect(good, g, mu);
    if (eps > 0.0) value += eps * quad.expect(poor, g, mu);
    return value;
  };
  const auto good_objective = [&](double mu) {
    const auto g = [&](double a) { return weight_fn(a) * loss_value(loss, a - mu); };
    return quad.expect(good, g, mu);
  };

  const auto support = [&](const ComponentView& c) {
    return c.is_point ? std::pair<double, double>{c.atom, c.atom}
                      : std::pair<double, double>{c.mean - 6.0 * c.stddev, c.mean + 6.0 * c.stddev};
  };
  const auto [glo, ghi] = support(good);
  const auto [plo, phi] = support(poor);
  const double lo = std::min(glo, plo) - 1.0;
  const double hi = std::max(ghi, phi) + 1.0;

  const auto minimize = [&](const std::function<double(double)>& f, bool* unimodal,
                            std::vector<double>* minima) {
    const GridScan scan = grid_minimize(f, lo, hi, 601);
    if (unimodal != nullptr) {
      std::vector<double> near;
      for (double x : scan.local_minima) {
        if (f(x) <= scan.best_f + 1e-6) near.push_back(x);
      }
      // Adjacent grid points around one basin are the same minimum.
      std::vector<double> distinct;
      const double step = (hi - lo) / 600.0;
      for (double x : near) {
        if (distinct.empty() || x - distinct.back() > 2.5 * step) distinct.push_back(x);
      }
      *unimodal = distinct.size() <= 1;
      if (minima != nullptr) *minima = distinct;
    }
    const double step = (hi - lo) / 600.0;
    return golden_section_min(f, scan.best_x - 2.0 * step, scan.best_x + 2.0 * step, 1e-8);
  };

  BiasBoundResult out;
  out.mu_star = minimize(mixture_objective, &out.unimodal, &out.minima);
  out.mu_plus = minimize(good_objective, nullptr, nullptr);
  out.bias = std::abs(out.mu_star - out.mu_plus);

  // Closed-form bound: eps * E_poor[w |a - mu_plus|] / E_mix[w].
  const auto w_dev = [&](double a) { return weight_fn(a) * std::abs(a - out.mu_plus); };
  const auto w_only = [&](double a) { return weight_fn(a); };
  const double numer = eps * quad.expect(poor, w_dev, out.mu_plus);
  const double denom =
      (1.0 - eps) * quad.expect(good, w_only, out.mu_plus) + eps * quad.expect(poor, w_only, out.mu_plus);
  out.bound = denom > 0.0 ? numer / denom : kInf;
  // Point-mass mixtures attain the bound exactly, so the comparison has to
  // absorb the 1e-8 optimizer tolerance.
  out.holds = out.bias <= out.bound + 1e-7;

  // Convexity prerequisite: the whole action support must sit inside the
  // convex region around mu_plus.
  const double radius = convex_radius(loss);
  if (std::isfinite(radius)) {
    const double reach = std::max(std::abs(lo + 1.0 - out.mu_plus), std::abs(hi - 1.0 - out.mu_plus));
    out.applicable = reach <= radius;
  }

  // Hessian-expectation bound over the bracketing interval, where f'' exists.
  const bool smooth = loss.kind == LossKind::L2 || loss.kind == LossKind::Flat ||
                      loss.kind == LossKind::Skew;
  if (smooth && out.applicable) {
    const auto f_second = [&](double u) {
      const double h = 1e-6;
      return (loss_grad(loss, u + h) - loss_grad(loss, u - h)) / (2.0 * h);
    };
    const double xlo = std::min(out.mu_plus, out.mu_star);
    const double xhi = std::max(out.mu_plus, out.mu_star);
    double min_hessian = kInf;
    for (int i = 0; i <= 40; ++i) {
      const double xi = xlo + (xhi - xlo) * i / 40.0;
      const auto wf2 = [&](double a) { return weight_fn(a) * f_second(a - xi); };
      const double h = (1.0 - eps) * quad.expect(good, wf2, xi) + eps * quad.expect(poor, wf2, xi);
      min_hessian = std::min(min_hessian, h);
    }
    const auto sup_grad = [&](double a) {
      // sup over mu between mu_plus and a of |f'(a - mu)|; |f'| grows with
      // the residual inside the convex region, so the endpoint attains it.
      return weight_fn(a) * std::abs(loss_grad(loss, a - out.mu_plus));
    };
    const double general_numer = eps * quad.expect(poor, sup_grad, out.mu_plus);
    if (min_hessian > 0.0) {
      out.bound_general = general_numer / min_hessian;
      out.has_general_bound = true;
    }
  }
  return out;
}

double gaussian_l2_gradient_gap(const std::vector<double>& action, const std::vector<double>& mu,
                                double sigma, double weight) {
  if (action.size() != mu.size()) throw ValidationError("dimension mismatch");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  const std::size_t d = action.size();
  const double two_pi = 2.0 * 3.14159265358979323846;

  const auto neg_log_likelihood = [&](const std::vector<double>& m) {
    double q = 0.0;
    for (std::size_t j = 0; j < d; ++j) q += (action[j] - m[j]) * (action[j] - m[j]);
    return weight * (q / (2.0 * sigma * sigma) +
                     0.5 * static_cast<double>(d) * std::log(two_pi * sigma * sigma));
  };

  // The likelihood is quadratic in mu, so the central difference has no
  // truncation error; h stays large to keep roundoff negligible.
  const double h = 0.01;
  double max_gap = 0.0;
  std::vector<double> probe = mu;
  for (std::size_t j = 0; j < d; ++j) {
    probe[j] = mu[j] + h;
    const double up = neg_log_likelihood(probe);
    probe[j] = mu[j] - h;
    const double down = neg_log_likelihood(probe);
    probe[j] = mu[j];
    const double fd = (up - down) / (2.0 * h);
    const double analytic = weight * (mu[j] - action[j]) / (sigma * sigma);
    max_gap = std::max(max_gap, std::abs(fd - analytic));
  }
  return max_gap;
}

namespace {

AdvantageStats weighted_cell_stats(const EmpiricalMdp& emp, const std::vector<double>& advantage,
                                   double quantile_level) {
  // Sample-level statistics: each observed (s,a) cell weighted by its visit
  // count, matching per-transition advantage statistics.
  const std::size_t cells = advantage.size();
  double total = 0.0, mean = 0.0;
  double min = kInf;
  for (std::size_t i = 0; i < cells; ++i) {
    const double c = static_cast<double>(emp.visit_counts[i]);
    if (c == 0.0) continue;
    total += c;
    mean += c * advantage[i];
    min = std::min(min, advantage[i]);
  }
  mean /= total;
  double ss = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double c = static_cast<double>(emp.visit_counts[i]);
    if (c == 0.0) continue;
    ss += c * (advantage[i] - mean) * (advantage[i] - mean);
  }
  std::vector<std::pair<double, double>> sorted;  // (advantage, count)
  for (std::size_t i = 0; i < cells; ++i) {
    if (emp.visit_counts[i] > 0) {
      sorted.emplace_back(advantage[i], static_cast<double>(emp.visit_counts[i]));
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const double target = quantile_level * total;
  double acc = 0.0, quantile = sorted.back().first;
  for (const auto& [a, c] : sorted) {
    acc += c;
    if (acc >= target) {
      quantile = a;
      break;
    }
  }
  AdvantageStats stats;
  stats.mean = mean;
  stats.stddev = std::sqrt(ss / total);
  stats.min = min;
  stats.quantile = quantile;
  stats.count = static_cast<std::size_t>(total);
  double aw = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (emp.visit_counts[i] > 0) aw += std::exp(advantage[i]);
  }
  stats.aw_normalizer = aw;
  return stats;
}

}  // namespace

ResamplingReport resampling_check(const EmpiricalMdp& emp,
                                  const std::vector<PriorityScheme>& schemes,
                                  const std::vector<double>& lambda_grid) {
  const TabularMDP& mdp = emp.mdp;
  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();

  const QV qv = exact_q_v(mdp, emp.behavior);
  std::vector<double> adv(n * na, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      if (emp.is_observed(s, a)) adv[s * na + a] = qv.advantage(mdp, s, a);
    }
  }

  ResamplingReport report;
  for (std::size_t s = 0; s < n; ++s) {
    if (!emp.state_observed[s]) report.skipped_states.push_back(s);
  }

  std::vector<PriorityScheme> all = schemes;
  all.push_back(PriorityScheme{});  // h == 1 baseline, PriorityKind::None
  const std::size_t base_index = all.size() - 1;

  report.best_return_with_h = -kInf;
  report.best_return_base = -kInf;

  for (std::size_t hi = 0; hi < all.size(); ++hi) {
    const PriorityScheme& scheme = all[hi];
    const AdvantageStats stats = weighted_cell_stats(emp, adv, scheme.quantile_level);
    std::vector<double> h(n * na, 1.0);
    for (std::size_t i = 0; i < n * na; ++i) {
      if (emp.visit_counts[i] > 0) h[i] = priority_value(scheme, adv[i], stats);
    }

    for (const double lambda : lambda_grid) {
      DiscretePolicy pi(n);
      for (std::size_t s = 0; s < n; ++s) {
        if (!emp.state_observed[s]) {
          pi[s].assign(na, 1.0 / static_cast<double>(na));
          continue;
        }
        // Route 1: renormalize pi_beta * h into the resampled behavior, then
        // apply the closed form against it.
        std::vector<double> re(na, 0.0);
        double z = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
          re[a] = emp.behavior[s][a] * h[s * na + a];
          z += re[a];
        }
        std::vector<double> adv_row(na);
        for (std::size_t a = 0; a < na; ++a) {
          re[a] /= z;
          adv_row[a] = adv[s * na + a];
        }
        const std::vector<double> route1 = constrained_optimal_row(re, adv_row, lambda);

        // Route 2: fold h into the advantage as lambda * log h against the
        // raw behavior.
        std::vector<double> shifted(na);
        for (std::size_t a = 0; a < na; ++a) {
          shifted[a] = adv_row[a] + lambda * std::log(h[s * na + a]);
        }
        const std::vector<double> route2 = constrained_optimal_row(emp.behavior[s], shifted, lambda);

        report.max_optimizer_tv = std::max(report.max_optimizer_tv, total_variation(route1, route2));
        pi[s] = route1;
      }

      double j = 0.0;
      const QV value = exact_q_v(mdp, pi);
      for (std::size_t s = 0; s < n; ++s) j += mdp.initial_dist()[s] * value.v[s];
      report.best_return_with_h = std::max(report.best_return_with_h, j);
      if (hi == base_index) report.best_return_base = std::max(report.best_return_base, j);
    }
  }

  report.margin = report.best_return_with_h - report.best_return_base;
  report.holds = report.margin >= -1e-9 && report.max_optimizer_tv <= 1e-8;
  return report;
}

bool TheoremSuiteReport::all_pass() const {
  for (const CheckReport& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace cawr::oracle
