#pragma once

#include <cmath>
#include <concepts>
#include <cstdio>
#include <string>
#include <vector>

#include "cvbell/errors.hpp"
#include "cvbell/measurement_function.hpp"

namespace cvbell {

inline constexpr int kDefaultQuadratureOrder = 200;
inline constexpr int kQuickQuadratureOrder = 50;
inline constexpr int kMaxQuadratureOrder = 512;

/// Gauss rule for the weight exp(-2 x^2) on the real line.
///
/// Nodes are strictly increasing and mirror-symmetric about 0. Weights are
/// positive up to order ~360; beyond that the outermost weights fall below
/// the smallest double and are stored as 0.
struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_hermite_rule(int order);

/// Sum of weights times integrand at the nodes. The exp(-2x^2) factor is part
/// of the rule, not of the integrand.
template <std::invocable<double> F>
double integrate(const QuadratureRule& rule, F&& integrand) {
  auto value_at = [&integrand](double x) {
    const double v = integrand(x);
    if (!std::isfinite(v)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "integrand is not finite at node x=%.17g", x);
      throw NumericalDomainError(buf);
    }
    return v;
  };
  // Mirror-image nodes are summed pairwise so odd integrands vanish exactly.
  const std::size_t n = rule.nodes.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    sum += rule.weights[i] * (value_at(rule.nodes[i]) + value_at(rule.nodes[j]));
  }
  if (n % 2 == 1) sum += rule.weights[n / 2] * value_at(rule.nodes[n / 2]);
  return sum;
}

/// The three primitive Gaussian integrals of a measurement function from
/// which every single-mode matrix element and kernel integral is built:
///   first         = int x f(x) e^{-2x^2} dx
///   square        = int f(x)^2 e^{-2x^2} dx
///   second_square = int x^2 f(x)^2 e^{-2x^2} dx
/// Sign-binned functions use closed forms; the jump at 0 defeats Gauss-Hermite.
struct GaussianMoments {
  double first = 0.0;
  double square = 0.0;
  double second_square = 0.0;
};

GaussianMoments gaussian_moments(const MeasurementFunction& f, const QuadratureRule& rule);

/// Throws InvalidArgument unless |f(x) + f(-x)| <= 1e-10 max(1, |f(x)|) at
/// every nonzero node.
void require_odd(const MeasurementFunction& f, const QuadratureRule& rule);

/// I+, I and I0 for f = g (so f+ = 2f, f- = 0):
///   i_plus  = 2 int e^{-2x^2} x (2f) dx
///   i_cross = 4 int x^2 e^{-2x^2} (2f)^2 dx
///   i_zero  =   int e^{-2x^2} (2f)^2 dx
struct KernelIntegrals {
  double i_plus = 0.0;
  double i_cross = 0.0;
  double i_zero = 0.0;
};

KernelIntegrals kernel_integrals(const MeasurementFunction& f, const QuadratureRule& rule);

KernelIntegrals kernel_integrals_from(const GaussianMoments& m);

}  // namespace cvbell
