#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "cvbell/model.hpp"

namespace cvbell {

/// Both sides of a Bell inequality and their ratio B = lhs / rhs.
struct BellResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::string inequality_id;
  std::string function_id;
  AngleConfig angles;
};

/// Tr(rho (x)_k A_k) for single-mode operators A_k, contracted entry by entry
/// over the sparse density matrix.
Complex expectation(const DensityMatrix& rho, const std::vector<Eigen::Matrix2cd>& site_ops);

/// Exact functional-moment inequality:
///   lhs = |<prod_k (f(X_k^theta_k) + i g(X_k^theta'_k))>|^2
///   rhs = <prod_k (f(X_k^theta_k)^2 + g(X_k^theta'_k)^2)>
BellResult evaluate(const DensityMatrix& rho, const MeasurementFunction& f, const MeasurementFunction& g,
                    const AngleConfig& angles, const QuadratureRule& rule);

/// Same, from precomputed Fock moments (skips the oddness check).
BellResult evaluate(const DensityMatrix& rho, const FockMoments& f, const FockMoments& g, const AngleConfig& angles);

/// Exhaustive search over theta'_k = theta_k +/- pi/2 sign patterns, with a
/// common theta_k swept over `resolution` points of [0, 2 pi). Ties keep the
/// first configuration found. Throws InternalError if the rhs is not angle
/// invariant to 1e-10 relative.
std::pair<AngleConfig, BellResult> angle_scan(const DensityMatrix& rho, const MeasurementFunction& f,
                                              const MeasurementFunction& g, int resolution,
                                              const QuadratureRule& rule);

struct EpsilonOptimum {
  double epsilon = 0.0;
  BellResult result;
};

/// Golden-section maximization of the ratio over f = g = x/(1+eps x^2),
/// eps in (0, 64], at the orthogonal angles for spec.r_split.
EpsilonOptimum optimize_epsilon_numeric(const StateSpec& spec, const QuadratureRule& rule);

}  // namespace cvbell
