#pragma once

#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "cvbell/quadrature.hpp"

namespace cvbell {

enum class Inequality { functional, cfrd, mk };

std::string_view to_string(Inequality ineq);
/// Accepts "functional", "cfrd" or "mk".
Inequality parse_inequality(std::string_view name);

enum class CriticalParameter { efficiency, purity, product };

std::string_view to_string(CriticalParameter p);

/// Bell ratio of the given inequality for an N-mode state with the
/// preferred split: r = floor(N/2) for the functional and CFRD forms (MK does
/// not depend on r).
double bell_ratio(Inequality ineq, int n, double eta, double p, const QuadratureRule& rule);

/// Bisection stops once the bracket is narrower than this times min(1, upper end).
inline constexpr double kCriticalTolerance = 1e-6;
inline constexpr double kEfficiencyFloor = 0.3;

/// Smallest eta in [0.3, 1] with B(eta, p) = 1, or nullopt if B(1, p) <= 1.
/// Throws InternalError if B(0.3, p) already exceeds 1.
std::optional<double> critical_efficiency(int n, double p, Inequality ineq, const QuadratureRule& rule);

/// Smallest p in [0, 1] with B(eta, p) = 1, or nullopt if B(eta, 1) <= 1.
std::optional<double> critical_purity(int n, double eta, Inequality ineq, const QuadratureRule& rule);

/// Large-N limit of the critical decoherence variable: eta * p on the pure
/// line p = 1 for the functional and CFRD forms (where it is the smallest
/// critical product), and eta p^2 for MK.
struct AsymptoticEstimate {
  double extrapolated = 0.0;
  double tail_value = 0.0;
  int tail_n = 0;
  std::vector<int> n_values;
  std::vector<double> values;
};

/// Critical values for even N up to n_max (n_max >= 20), extrapolated to
/// N -> infinity by fitting a + b/N + c/N^2 through the last three points.
AsymptoticEstimate asymptotic_product(Inequality ineq, int n_max, const QuadratureRule& rule);

/// Exact interpolation of a + b/N + c/N^2 through three points; returns a.
double richardson_limit(const int (&n)[3], const double (&value)[3]);

struct CriticalCurve {
  Inequality inequality = Inequality::functional;
  CriticalParameter parameter = CriticalParameter::efficiency;
  std::vector<int> n_values;
  std::vector<std::optional<double>> critical_values;  ///< nullopt: no violation at any value <= 1
};

/// eta_crit(N) at purity `other` (efficiency), p_crit(N) at efficiency `other`
/// (purity), or the pure-line product (product, `other` ignored).
CriticalCurve critical_curve(Inequality ineq, CriticalParameter parameter, const std::vector<int>& n_values,
                             double other, const QuadratureRule& rule);

/// Columns N,value,parameter,inequality_id,converged_flag; empty value and flag 0
/// where no violation exists.
void write_csv(const CriticalCurve& curve, std::ostream& out, bool header = true);

}  // namespace cvbell
