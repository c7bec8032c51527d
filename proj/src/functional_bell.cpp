#include "cvbell/functional_bell.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "cvbell/errors.hpp"

namespace cvbell {

namespace {

constexpr double kDamping = 0.5;
constexpr double kStepTolerance = 1e-12;
constexpr int kMaxIterations = 10000;

struct FixedPoint {
  double value;
  double residual;
  int iterations;
};

FixedPoint damped_fixed_point(const std::function<double(double)>& map, double start, const char* what) {
  double eps = start;
  double residual = 0.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const double target = map(eps);
    if (!std::isfinite(target) || !(target > 0.0)) {
      throw ConvergenceError(std::string(what) + ": iterate left the positive axis", residual);
    }
    residual = std::abs(target - eps);
    const double next = (1.0 - kDamping) * eps + kDamping * target;
    const double step = std::abs(next - eps);
    eps = next;
    if (step < kStepTolerance) return {eps, std::abs(map(eps) - eps), it};
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: no convergence after %d iterations (residual %.3g)", what, kMaxIterations,
                residual);
  throw ConvergenceError(buf, residual);
}

// e = 4 I0 / I for f = x / (1 + eps x^2).
double kernel_ratio(double eps, const QuadratureRule& rule) {
  const KernelIntegrals k = kernel_integrals_from(gaussian_moments(MeasurementFunction::optimal(eps), rule));
  return 4.0 * k.i_zero / k.i_cross;
}

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
}

double rhs_denominator(int n, int r, double i_zero, double c) {
  return std::pow(i_zero, r) * std::pow(c, n - r) + std::pow(c, r) * std::pow(i_zero, n - r);
}

}  // namespace

double lossy_epsilon_map(double eta, double eps) {
  return 2.0 * eta * eps / (2.0 * eta + (1.0 - eta) * eps);
}

double odd_epsilon_map(int n, double eta, double e, OddLossReading reading) {
  const double e_eta = lossy_epsilon_map(eta, e);
  const double e_plus = e_eta + 4.0;
  const double e_minus = e - 4.0;
  const double numerator = n * e_plus - e_eta * e_minus / e;
  const double correction = reading == OddLossReading::printed ? e_eta * e_eta * e_minus / (e * e)
                                                               : e_eta * e_minus / e;
  return e_eta * numerator / (n * e_plus + correction);
}

EpsilonSolution solve_epsilon_even(double eta, const QuadratureRule& rule) {
  require_eta(eta);
  const FixedPoint ideal =
      damped_fixed_point([&](double eps) { return kernel_ratio(eps, rule); }, 1.0, "ideal epsilon fixed point");

  EpsilonSolution sol;
  sol.epsilon_ideal = ideal.value;
  sol.epsilon_lossy = ideal.value;
  sol.residual = ideal.residual;
  sol.iterations = ideal.iterations;
  if (eta == 1.0) return sol;

  const FixedPoint lossy = damped_fixed_point(
      [&](double eps) { return lossy_epsilon_map(eta, kernel_ratio(eps, rule)); },
      lossy_epsilon_map(eta, ideal.value), "lossy epsilon fixed point");
  sol.epsilon_ideal = kernel_ratio(lossy.value, rule);
  sol.epsilon_lossy = lossy.value;
  sol.residual = std::max(ideal.residual, lossy.residual);
  sol.iterations += lossy.iterations;
  return sol;
}

EpsilonSolution solve_epsilon_odd(int n, double eta, const QuadratureRule& rule, OddLossReading reading) {
  if (n < 3 || n % 2 == 0) throw InvalidArgument("solve_epsilon_odd needs an odd n >= 3");
  require_eta(eta);
  const EpsilonSolution even = solve_epsilon_even(eta, rule);
  const FixedPoint odd = damped_fixed_point(
      [&](double eps) { return odd_epsilon_map(n, eta, kernel_ratio(eps, rule), reading); }, even.epsilon_lossy,
      "odd epsilon fixed point");
  EpsilonSolution sol;
  sol.epsilon_ideal = kernel_ratio(odd.value, rule);
  sol.epsilon_lossy = lossy_epsilon_map(eta, sol.epsilon_ideal);
  sol.epsilon_odd = odd.value;
  sol.residual = odd.residual;
  sol.iterations = even.iterations + odd.iterations;
  return sol;
}

BellResult orthogonal_bell_value(const StateSpec& spec, const KernelIntegrals& k) {
  spec.validate();
  const int n = spec.n_modes;
  const int r = spec.r_split;
  const double eta = spec.efficiency;
  const double p = spec.purity;
  const double c = eta * k.i_cross + (1.0 - eta) * k.i_zero;
  const double half_norm = std::sqrt(2.0 / std::numbers::pi) / 2.0;
  const double m01 = half_norm * k.i_plus;  // <0| f(X) |1>

  BellResult out;
  out.rhs = 0.5 * std::pow(half_norm, n) * rhs_denominator(n, r, k.i_zero, c);
  out.lhs = p * p * std::pow(eta, n) * std::pow(4.0, n - 1) * std::pow(m01, 2 * n);
  out.ratio = out.lhs / out.rhs;
  out.angles = orthogonal_angles(n, r);
  out.inequality_id = "functional";
  return out;
}

BellResult bell_value(const StateSpec& spec, const QuadratureRule& rule, OddLossReading reading) {
  spec.validate();
  const int n = spec.n_modes;
  if (n < 2) throw InvalidArgument("closed-form Bell value needs at least two modes");
  const int r_opt = n / 2;
  if (spec.r_split != r_opt) {
    throw InvalidArgument("closed form covers r = " + std::to_string(r_opt) + " only; use the oracle for r = " +
                          std::to_string(spec.r_split));
  }
  const double eta = spec.efficiency;
  const double p = spec.purity;
  const EpsilonSolution sol = n % 2 == 0 ? solve_epsilon_even(eta, rule) : solve_epsilon_odd(n, eta, rule, reading);
  const MeasurementFunction f = MeasurementFunction::optimal(sol.optimum());
  const KernelIntegrals k = kernel_integrals_from(gaussian_moments(f, rule));
  const double c = eta * k.i_cross + (1.0 - eta) * k.i_zero;

  // Even-N form 2^{N-2} [2 (I+)^4 eta^2 / (pi I0 C)]^{N/2}; purity enters as p^2
  // because the dephased admixture only removes the N-mode coherence.
  const double log_even = (n - 2) * std::log(2.0) +
                          0.5 * n * std::log(2.0 * std::pow(k.i_plus, 4) * eta * eta / (std::numbers::pi * k.i_zero * c));
  double ratio = p > 0.0 ? p * p * std::exp(log_even) : 0.0;
  if (n % 2 == 1) ratio *= 2.0 * std::sqrt(k.i_zero * c) / (k.i_zero + c);

  BellResult out = orthogonal_bell_value(spec, k);
  out.ratio = ratio;
  out.lhs = ratio * out.rhs;
  out.function_id = f.id();
  return out;
}

BellResult cfrd_bell_value(const StateSpec& spec, const QuadratureRule& rule) {
  const MeasurementFunction f = MeasurementFunction::identity();
  BellResult out = orthogonal_bell_value(spec, kernel_integrals(f, rule));
  out.inequality_id = "cfrd";
  out.function_id = f.id();
  return out;
}

}  // namespace cvbell
