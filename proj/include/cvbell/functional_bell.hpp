#pragma once

#include <optional>

#include "cvbell/model.hpp"
#include "cvbell/oracle.hpp"
#include "cvbell/quadrature.hpp"

namespace cvbell {

/// Parameters of the optimal measurement function x / (1 + eps x^2).
///
/// epsilon_ideal is 4 I0 / I evaluated at the optimal function. For even N at
/// eta = 1 it is the fixed point of eps = 4 I0(eps) / I(eps); with loss the
/// optimum moves to epsilon_lossy = 2 eta e / (2 eta + (1 - eta) e), where e is
/// again 4 I0 / I at that same optimum. For odd N the optimum is epsilon_odd.
struct EpsilonSolution {
  double epsilon_ideal = 0.0;
  double epsilon_lossy = 0.0;
  std::optional<double> epsilon_odd;
  double residual = 0.0;
  int iterations = 0;

  /// The epsilon of the function that maximizes the Bell ratio.
  double optimum() const { return epsilon_odd.value_or(epsilon_lossy); }
};

/// Two readings of the odd-N lossy stationarity condition. `printed` carries
/// eps(eta)^2 (eps - 4) / eps^2 in the denominator; `symmetric` uses
/// eps(eta) (eps - 4) / eps like the numerator.
enum class OddLossReading { printed, symmetric };

/// 2 eta eps / (2 eta + (1 - eta) eps).
double lossy_epsilon_map(double eta, double eps);

/// Right-hand side of the odd-N condition eps' = F(eps) for a given
/// e = 4 I0 / I. At eta = 1 both readings reduce to
///   e (N (e + 4) - (e - 4)) / (N (e + 4) + (e - 4)).
double odd_epsilon_map(int n, double eta, double e, OddLossReading reading = OddLossReading::printed);

EpsilonSolution solve_epsilon_even(double eta, const QuadratureRule& rule);

EpsilonSolution solve_epsilon_odd(int n, double eta, const QuadratureRule& rule,
                                  OddLossReading reading = OddLossReading::printed);

/// Optimal functional-moment Bell ratio for r = N/2 (even) or r = (N-1)/2
/// (odd), from the kernel integrals of the optimal function.
BellResult bell_value(const StateSpec& spec, const QuadratureRule& rule,
                      OddLossReading reading = OddLossReading::printed);

/// Bell ratio at orthogonal angles for f = g and any split r, in closed form
/// from the kernel integrals:
///   B = 2^{N-1} (2/pi)^{N/2} p^2 eta^N (I+)^{2N} / (I0^r C^{N-r} + C^r I0^{N-r}),
/// C = eta I + (1 - eta) I0.
BellResult orthogonal_bell_value(const StateSpec& spec, const KernelIntegrals& k);

/// The original CFRD inequality (f = g = identity).
BellResult cfrd_bell_value(const StateSpec& spec, const QuadratureRule& rule);

}  // namespace cvbell
