#pragma once

#include <complex>
#include <string_view>

#include "cvbell/model.hpp"

namespace cvbell {

/// Which combination of Pi_N = prod_k (f_bin(x^theta_k) + i f_bin(x^theta'_k))
/// produced |S_N|.
enum class MKVariant {
  even_re_plus_im,   ///< 2^{-N/2} (Re + Im)
  even_re_minus_im,  ///< 2^{-N/2} (Re - Im)
  odd_re,            ///< 2^{-(N-1)/2} Re
  odd_im,            ///< 2^{-(N-1)/2} Im
  odd_norm,          ///< 2^{-(N-1)/2} |Pi_N|
};

std::string_view to_string(MKVariant v);

struct MKResult {
  double s_value = 0.0;
  double bell_ratio = 0.0;
  AngleConfig angles;
  MKVariant variant = MKVariant::even_re_plus_im;
  /// True when the winning Pi_N was built with theta and theta' swapped.
  bool exchanged = false;
  Complex pi_n;
};

/// theta_k = (-1)^{N+1} pi (k-1) / (2N), theta'_k = theta_k + pi/2 for k <= r;
/// theta_k = (-1)^N pi (k-1) / (2N),     theta'_k = theta_k - pi/2 for k > r.
/// (k is 1-based in these formulas.)
AngleConfig mk_optimal_angles(int n, int r);

/// <Pi_N> for sign-binned outcomes.
Complex mk_pi(const DensityMatrix& rho, const AngleConfig& angles);

/// Largest |S_N| over the allowed combinations and over the exchanged form.
MKResult mk_evaluate(const DensityMatrix& rho, const AngleConfig& angles);

/// p (sqrt(2)/2) (4 eta / pi)^{N/2}, independent of r.
double mk_bell_value(const StateSpec& spec);

/// 2^{(1-2N)/N} pi: the efficiency at which a pure state reaches |S_N| = 1.
double mk_critical_product(int n);

}  // namespace cvbell
