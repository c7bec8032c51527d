#include "cvbell/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numbers>

namespace cvbell {

namespace {

// Orthonormal Hermite recurrence at u. Returns (h_n(u), h_{n-1}(u)), where
// h_k are normalized against exp(-u^2).
std::pair<double, double> hermite_pair(int n, double u) {
  double p1 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  double p2 = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = u * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
  }
  return {p1, p2};
}

}  // namespace

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1 || order > kMaxQuadratureOrder) {
    throw InvalidArgument("quadrature order must lie in [1, " + std::to_string(kMaxQuadratureOrder) + "], got " +
                          std::to_string(order));
  }
  const int n = order;

  // Golub-Welsch for starting abscissae of the exp(-u^2) rule, polished by Newton.
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  if (n > 1) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  }

  QuadratureRule rule;
  rule.order = n;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);

  const double sqrt2 = std::numbers::sqrt2;
  // Work on the non-negative half and mirror, which makes the rule exactly symmetric.
  for (int i = n / 2; i < n; ++i) {
    double z = (n % 2 == 1 && i == n / 2) ? 0.0 : u[static_cast<std::size_t>(i)];
    double deriv = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pn1] = hermite_pair(n, z);
      deriv = std::sqrt(2.0 * n) * pn1;
      const double step = pn / deriv;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (n % 2 == 1 && i == n / 2) z = 0.0;
    const auto [pn, pn1] = hermite_pair(n, z);
    (void)pn;
    deriv = std::sqrt(2.0 * n) * pn1;
    const double w_u = 2.0 / (deriv * deriv);

    const double x = z / sqrt2;
    const double w = w_u / sqrt2;
    const auto hi = static_cast<std::size_t>(i);
    const auto lo = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[hi] = x;
    rule.weights[hi] = w;
    rule.nodes[lo] = -x;
    rule.weights[lo] = w;
  }
  return rule;
}

void require_odd(const MeasurementFunction& f, const QuadratureRule& rule) {
  for (double x : rule.nodes) {
    if (x <= 0.0) continue;
    const double a = f(x);
    const double b = f(-x);
    if (std::abs(a + b) > 1e-10 * std::max(1.0, std::abs(a))) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "measurement function %s is not odd at x=%.6g", f.id().c_str(), x);
      throw InvalidArgument(buf);
    }
  }
}

GaussianMoments gaussian_moments(const MeasurementFunction& f, const QuadratureRule& rule) {
  if (f.is_sign_bin()) {
    // int |x| e^{-2x^2} = 1/2, int e^{-2x^2} = sqrt(pi/2), int x^2 e^{-2x^2} = sqrt(pi/2)/4.
    const double c = f.scale();
    const double g0 = std::sqrt(std::numbers::pi / 2.0);
    return {0.5 * c, c * c * g0, c * c * g0 / 4.0};
  }
  GaussianMoments m;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    const double v = f(x);
    if (!std::isfinite(v)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "measurement function %s is not finite at node x=%.17g", f.id().c_str(), x);
      throw NumericalDomainError(buf);
    }
    const double w = rule.weights[i];
    m.first += w * x * v;
    m.square += w * v * v;
    m.second_square += w * x * x * v * v;
  }
  return m;
}

KernelIntegrals kernel_integrals_from(const GaussianMoments& m) {
  return {4.0 * m.first, 16.0 * m.second_square, 4.0 * m.square};
}

KernelIntegrals kernel_integrals(const MeasurementFunction& f, const QuadratureRule& rule) {
  require_odd(f, rule);
  return kernel_integrals_from(gaussian_moments(f, rule));
}

}  // namespace cvbell
