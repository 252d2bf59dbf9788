#pragma once

#include <functional>
#include <vector>

namespace cawr {

/// Nodes and weights of a quadrature rule.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] (Newton iteration on Legendre roots).
Quadrature gauss_legendre(int n);

/// Gauss-Hermite rule for weight exp(-x^2) (Golub-Welsch on the Jacobi matrix).
Quadrature gauss_hermite(int n);

/// Integral of f over [lo, hi] with a Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const Quadrature& gl);

/// E[g(X)] for X ~ N(mean, stddev^2) using a Gauss-Hermite rule.
double normal_expectation(const std::function<double(double)>& g, double mean,
                          double stddev, const Quadrature& gh);

/// Minimizer of a unimodal f on [lo, hi] by golden-section search.
double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol);

/// Grid scan over [lo, hi]: global minimum plus all strict local minima.
struct GridScan {
  double best_x = 0.0;
  double best_f = 0.0;
  std::vector<double> local_minima;  // x positions, includes best_x
};
GridScan grid_minimize(const std::function<double(double)>& f, double lo,
                       double hi, int points);

}  // namespace cawr
