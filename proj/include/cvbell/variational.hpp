#pragma once

#include <ostream>
#include <vector>

#include "cvbell/model.hpp"
#include "cvbell/oracle.hpp"

namespace cvbell {

/// A free odd measurement function, tabulated on the positive nodes of a
/// quadrature rule. The scale is fixed by requiring f(x_1) = norm_gauge * x_1
/// at the smallest positive node x_1.
struct FreeFunction {
  std::vector<double> abscissae;
  std::vector<double> node_values;
  double norm_gauge = 1.0;

  /// Samples `f` on the positive nodes of `rule` and rescales it to the gauge.
  static FreeFunction from(const MeasurementFunction& f, const QuadratureRule& rule, double norm_gauge = 1.0);

  MeasurementFunction to_function() const;

  /// Rescales node_values so the gauge constraint holds. Throws InvalidArgument
  /// when the value at the first node is not positive.
  void apply_gauge();
};

struct VariationalResult;

struct VariationalOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-7;
  double fd_step = 1e-6;
  /// Optimize f and g independently instead of tying g = f.
  bool relaxed = false;
  /// If set, receives the last accepted iterate before a ConvergenceError is thrown.
  VariationalResult* best_so_far = nullptr;
};

struct VariationalResult {
  FreeFunction f;
  FreeFunction g;  ///< equals f unless relaxed
  BellResult result;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> ratio_history;
};

/// Maximizes the exact Bell ratio over the node values of f (= g) by BFGS
/// ascent with central-difference gradients, at orthogonal angles for
/// spec.r_split. Throws ConvergenceError after max_iterations.
VariationalResult optimize_function(const StateSpec& spec, const QuadratureRule& rule, const FreeFunction& init,
                                    const VariationalOptions& options = {});

/// Max-norm of the ratio's gradient with respect to the gauge-free node values.
double euler_lagrange_residual(const FreeFunction& f, const StateSpec& spec, const QuadratureRule& rule);

/// Weighted least-squares fit of amplitude * x / (1 + eps x^2) to the node values.
struct EpsilonFit {
  double epsilon = 0.0;
  double amplitude = 0.0;
  /// sqrt(sum w (f - fit)^2 / sum w f^2) with the Gaussian weights.
  double weighted_l2_error = 0.0;
};

EpsilonFit fit_optimal_family(const FreeFunction& f, const QuadratureRule& rule);

/// "node,value" rows with a header, 12 significant digits.
void write_csv(const FreeFunction& f, std::ostream& out);

}  // namespace cvbell
