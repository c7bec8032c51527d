#include "cvbell/mk_binning.hpp"

#include <cmath>
#include <numbers>

#include "cvbell/errors.hpp"
#include "cvbell/oracle.hpp"

namespace cvbell {

namespace {

constexpr double kPi = std::numbers::pi;

// Sign-binned moments are exact and do not depend on the quadrature order.
const QuadratureRule& unused_rule() {
  static const QuadratureRule rule = gauss_hermite_rule(1);
  return rule;
}

}  // namespace

std::string_view to_string(MKVariant v) {
  switch (v) {
    case MKVariant::even_re_plus_im: return "even_re_plus_im";
    case MKVariant::even_re_minus_im: return "even_re_minus_im";
    case MKVariant::odd_re: return "odd_re";
    case MKVariant::odd_im: return "odd_im";
    case MKVariant::odd_norm: return "odd_norm";
  }
  return "unknown";
}

AngleConfig mk_optimal_angles(int n, int r) {
  if (n < 1 || r < 1 || r > n) throw InvalidArgument("mk_optimal_angles: need 1 <= r <= n");
  std::vector<double> theta(static_cast<std::size_t>(n));
  std::vector<double> theta_prime(static_cast<std::size_t>(n));
  const double sign_low = n % 2 == 0 ? -1.0 : 1.0;  // (-1)^{N+1}
  for (int k = 1; k <= n; ++k) {
    const double base = kPi * (k - 1) / (2.0 * n);
    const auto i = static_cast<std::size_t>(k - 1);
    if (k <= r) {
      theta[i] = sign_low * base;
      theta_prime[i] = theta[i] + kPi / 2;
    } else {
      theta[i] = -sign_low * base;
      theta_prime[i] = theta[i] - kPi / 2;
    }
  }
  return AngleConfig(std::move(theta), std::move(theta_prime));
}

Complex mk_pi(const DensityMatrix& rho, const AngleConfig& angles) {
  if (static_cast<int>(angles.size()) != rho.n_modes()) {
    throw InvalidArgument("angle configuration does not match the number of modes");
  }
  const FockMoments bin = fock_moments(MeasurementFunction::sign_bin(), unused_rule());
  std::vector<Eigen::Matrix2cd> ops;
  ops.reserve(angles.size());
  for (std::size_t k = 0; k < angles.size(); ++k) {
    ops.push_back(site_operator(bin, bin, angles.theta()[k], angles.theta_prime()[k]).lhs);
  }
  return expectation(rho, ops);
}

MKResult mk_evaluate(const DensityMatrix& rho, const AngleConfig& angles) {
  const int n = rho.n_modes();
  MKResult best;
  bool have = false;
  auto consider = [&](double s, MKVariant v, bool exchanged, Complex pi) {
    s = std::abs(s);
    if (!have || s > best.s_value * (1.0 + 1e-12)) {
      best.s_value = s;
      best.variant = v;
      best.exchanged = exchanged;
      best.pi_n = pi;
      have = true;
    }
  };
  for (const bool exchanged : {false, true}) {
    const AngleConfig a = exchanged ? angles.exchanged() : angles;
    const Complex pi = mk_pi(rho, a);
    if (n % 2 == 0) {
      const double norm = std::pow(2.0, -0.5 * n);
      consider(norm * (pi.real() + pi.imag()), MKVariant::even_re_plus_im, exchanged, pi);
      consider(norm * (pi.real() - pi.imag()), MKVariant::even_re_minus_im, exchanged, pi);
    } else {
      const double norm = std::pow(2.0, -0.5 * (n - 1));
      consider(norm * pi.real(), MKVariant::odd_re, exchanged, pi);
      consider(norm * pi.imag(), MKVariant::odd_im, exchanged, pi);
      consider(norm * std::abs(pi), MKVariant::odd_norm, exchanged, pi);
    }
  }
  best.bell_ratio = best.s_value;
  best.angles = angles;
  return best;
}

double mk_bell_value(const StateSpec& spec) {
  spec.validate();
  return spec.purity * (std::numbers::sqrt2 / 2.0) * std::pow(4.0 * spec.efficiency / kPi, 0.5 * spec.n_modes);
}

double mk_critical_product(int n) {
  if (n < 2) throw InvalidArgument("mk_critical_product needs n >= 2");
  return std::pow(2.0, (1.0 - 2.0 * n) / n) * kPi;
}

}  // namespace cvbell
