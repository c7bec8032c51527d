#include "cvbell/oracle.hpp"

#include <cmath>
#include <numbers>

#include "cvbell/errors.hpp"

namespace cvbell {

namespace {

constexpr int kMaxScanModes = 8;
constexpr int kMaxOptimizeModes = 10;
constexpr double kEpsilonUpper = 64.0;

}  // namespace

Complex expectation(const DensityMatrix& rho, const std::vector<Eigen::Matrix2cd>& site_ops) {
  const int n = rho.n_modes();
  if (static_cast<int>(site_ops.size()) != n) {
    throw InvalidArgument("expected " + std::to_string(n) + " site operators, got " +
                          std::to_string(site_ops.size()));
  }
  // Tr(rho A) = sum_ij rho_ij A_ji with A_ji = prod_k (A_k)_{j_k i_k}.
  Complex total{};
  for (const auto& [key, value] : rho.entries()) {
    const auto [row, col] = key;
    Complex term = value;
    for (int k = 0; k < n && term != Complex{}; ++k) {
      term *= site_ops[static_cast<std::size_t>(k)]((col >> k) & 1U, (row >> k) & 1U);
    }
    total += term;
  }
  return total;
}

BellResult evaluate(const DensityMatrix& rho, const FockMoments& f, const FockMoments& g,
                    const AngleConfig& angles) {
  const int n = rho.n_modes();
  if (static_cast<int>(angles.size()) != n) {
    throw InvalidArgument("angle configuration has " + std::to_string(angles.size()) + " sites but the state has " +
                          std::to_string(n) + " modes");
  }
  std::vector<Eigen::Matrix2cd> lhs_ops;
  std::vector<Eigen::Matrix2cd> rhs_ops;
  lhs_ops.reserve(static_cast<std::size_t>(n));
  rhs_ops.reserve(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const SiteOperator op = site_operator(f, g, angles.theta()[k], angles.theta_prime()[k]);
    lhs_ops.push_back(op.lhs);
    rhs_ops.push_back(op.rhs);
  }
  BellResult result;
  result.lhs = std::norm(expectation(rho, lhs_ops));
  result.rhs = expectation(rho, rhs_ops).real();
  if (!(result.rhs > 0.0)) throw NumericalDomainError("right-hand side vanished; measurement function is zero");
  result.ratio = result.lhs / result.rhs;
  result.inequality_id = "functional";
  result.angles = angles;
  return result;
}

BellResult evaluate(const DensityMatrix& rho, const MeasurementFunction& f, const MeasurementFunction& g,
                    const AngleConfig& angles, const QuadratureRule& rule) {
  require_odd(f, rule);
  require_odd(g, rule);
  BellResult result = evaluate(rho, fock_moments(f, rule), fock_moments(g, rule), angles);
  result.function_id = f.id() == g.id() ? f.id() : f.id() + "|" + g.id();
  return result;
}

std::pair<AngleConfig, BellResult> angle_scan(const DensityMatrix& rho, const MeasurementFunction& f,
                                              const MeasurementFunction& g, int resolution,
                                              const QuadratureRule& rule) {
  if (resolution < 2) throw InvalidArgument("angle scan resolution must be >= 2");
  const int n = rho.n_modes();
  if (n > kMaxScanModes) throw InvalidArgument("angle scan is limited to 8 modes");
  require_odd(f, rule);
  require_odd(g, rule);
  const FockMoments fm = fock_moments(f, rule);
  const FockMoments gm = fock_moments(g, rule);

  BellResult best;
  bool have_best = false;
  double rhs_reference = 0.0;
  for (int step = 0; step < resolution; ++step) {
    const double phase = 2.0 * std::numbers::pi * step / resolution;
    for (std::uint32_t pattern = 0; pattern < (1U << n); ++pattern) {
      std::vector<double> theta(static_cast<std::size_t>(n), phase);
      std::vector<double> theta_prime(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        // Bit clear means theta' = theta + pi/2.
        const double shift = ((pattern >> k) & 1U) ? -std::numbers::pi / 2 : std::numbers::pi / 2;
        theta_prime[static_cast<std::size_t>(k)] = phase + shift;
      }
      BellResult res = evaluate(rho, fm, gm, AngleConfig(std::move(theta), std::move(theta_prime)));
      if (!have_best) {
        rhs_reference = res.rhs;
      } else if (std::abs(res.rhs - rhs_reference) > 1e-10 * std::abs(rhs_reference)) {
        throw InternalError("right-hand side changed with measurement angles");
      }
      if (!have_best || res.lhs > best.lhs * (1.0 + 1e-12)) {
        best = std::move(res);
        have_best = true;
      }
    }
  }
  best.function_id = f.id() == g.id() ? f.id() : f.id() + "|" + g.id();
  return {best.angles, best};
}

EpsilonOptimum optimize_epsilon_numeric(const StateSpec& spec, const QuadratureRule& rule) {
  spec.validate();
  if (spec.n_modes > kMaxOptimizeModes) throw InvalidArgument("numeric epsilon optimization is limited to 10 modes");
  const DensityMatrix rho = density_matrix(spec);
  const AngleConfig angles = orthogonal_angles(spec.n_modes, spec.r_split);

  auto ratio_at = [&](double eps) {
    const FockMoments m = fock_moments(MeasurementFunction::optimal(eps), rule);
    return evaluate(rho, m, m, angles).ratio;
  };

  // Golden section on [lo, hi]; the ratio is unimodal in eps on this bracket.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-9;
  double hi = kEpsilonUpper;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = ratio_at(x1);
  double f2 = ratio_at(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = ratio_at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = ratio_at(x1);
    }
  }
  EpsilonOptimum out;
  out.epsilon = 0.5 * (lo + hi);
  const MeasurementFunction f = MeasurementFunction::optimal(out.epsilon);
  out.result = evaluate(rho, f, f, angles, rule);
  return out;
}

}  // namespace cvbell
