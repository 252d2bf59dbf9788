#include "cawr/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cawr/errors.hpp"

namespace cawr {

Quadrature gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double pi = 3.14159265358979323846;
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P'_n(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

Quadrature gauss_hermite(int n) {
  if (n < 1) throw ConfigError("gauss_hermite: order must be >= 1");
  // Jacobi matrix for Hermite polynomials: zero diagonal, off-diagonal sqrt(k/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double sqrt_pi = std::sqrt(3.14159265358979323846);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    q.weights[i] = sqrt_pi * v0 * v0;
  }
  return q;
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const Quadrature& gl) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
  }
  return half * sum;
}

double normal_expectation(const std::function<double(double)>& g, double mean,
                          double stddev, const Quadrature& gh) {
  const double inv_sqrt_pi = 1.0 / std::sqrt(3.14159265358979323846);
  const double scale = std::sqrt(2.0) * stddev;
  double sum = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    sum += gh.weights[i] * g(mean + scale * gh.nodes[i]);
  }
  return inv_sqrt_pi * sum;
}

double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

GridScan grid_minimize(const std::function<double(double)>& f, double lo,
                       double hi, int points) {
  if (points < 3) throw ConfigError("grid_minimize: need at least 3 points");
  GridScan scan;
  std::vector<double> xs(points), fs(points);
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    xs[i] = lo + step * i;
    fs[i] = f(xs[i]);
  }
  int best = 0;
  for (int i = 1; i < points; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  scan.best_x = xs[best];
  scan.best_f = fs[best];
  for (int i = 0; i < points; ++i) {
    const bool left_ok = (i == 0) || fs[i] <= fs[i - 1];
    const bool right_ok = (i == points - 1) || fs[i] <= fs[i + 1];
    const bool strict = ((i == 0) || fs[i] < fs[i - 1]) || ((i == points - 1) || fs[i] < fs[i + 1]);
    if (left_ok && right_ok && strict) scan.local_minima.push_back(xs[i]);
  }
  return scan;
}

}  // namespace cawr
