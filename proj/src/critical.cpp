#include "cvbell/critical.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include "cvbell/errors.hpp"
#include "cvbell/functional_bell.hpp"
#include "cvbell/mk_binning.hpp"

namespace cvbell {

namespace {

// Monotone increasing g on [lo, hi] with g(lo) < 1 < g(hi). The tolerance is
// relative below 1: purity roots at large N sit near 1e-4, where B ~ p^2
// needs the finer resolution.
double bisect_unit_crossing(const std::function<double(double)>& g, double lo, double hi) {
  while (hi - lo > kCriticalTolerance * std::min(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void check_cross(double exact, double bisected, const char* what) {
  if (std::abs(exact - bisected) > 10 * kCriticalTolerance * std::min(1.0, exact)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: closed form %.9g disagrees with bisection %.9g", what, exact, bisected);
    throw InternalError(buf);
  }
}

}  // namespace

std::string_view to_string(Inequality ineq) {
  switch (ineq) {
    case Inequality::functional: return "functional";
    case Inequality::cfrd: return "cfrd";
    case Inequality::mk: return "mk";
  }
  return "unknown";
}

Inequality parse_inequality(std::string_view name) {
  if (name == "functional") return Inequality::functional;
  if (name == "cfrd") return Inequality::cfrd;
  if (name == "mk") return Inequality::mk;
  throw InvalidArgument("unknown inequality '" + std::string(name) + "' (expected functional, cfrd or mk)");
}

std::string_view to_string(CriticalParameter p) {
  switch (p) {
    case CriticalParameter::efficiency: return "efficiency";
    case CriticalParameter::purity: return "purity";
    case CriticalParameter::product: return "product";
  }
  return "unknown";
}

double bell_ratio(Inequality ineq, int n, double eta, double p, const QuadratureRule& rule) {
  const StateSpec spec{n, n / 2, p, eta};
  switch (ineq) {
    case Inequality::functional: return bell_value(spec, rule).ratio;
    case Inequality::cfrd: return cfrd_bell_value(spec, rule).ratio;
    case Inequality::mk: return mk_bell_value(spec);
  }
  throw InvalidArgument("unknown inequality");
}

std::optional<double> critical_efficiency(int n, double p, Inequality ineq, const QuadratureRule& rule) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("purity must lie in (0, 1]");
  auto g = [&](double eta) { return bell_ratio(ineq, n, eta, p, rule); };
  if (g(1.0) <= 1.0) return std::nullopt;
  if (g(kEfficiencyFloor) > 1.0) {
    throw InternalError("Bell ratio exceeds 1 at the efficiency floor for N=" + std::to_string(n) +
                        "; monotone bracket assumption broken");
  }
  const double eta = bisect_unit_crossing(g, kEfficiencyFloor, 1.0);
  if (ineq == Inequality::mk) {
    // p (sqrt2/2) (4 eta / pi)^{N/2} = 1
    const double exact = std::numbers::pi / 4.0 * std::pow(std::numbers::sqrt2 / p, 2.0 / n);
    check_cross(exact, eta, "MK critical efficiency");
    return exact;
  }
  return eta;
}

std::optional<double> critical_purity(int n, double eta, Inequality ineq, const QuadratureRule& rule) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
  auto g = [&](double p) { return bell_ratio(ineq, n, eta, p, rule); };
  if (g(1.0) <= 1.0) return std::nullopt;
  const double p = bisect_unit_crossing(g, 0.0, 1.0);
  if (ineq == Inequality::mk) {
    const double exact = 1.0 / mk_bell_value(StateSpec{n, n / 2, 1.0, eta});
    check_cross(exact, p, "MK critical purity");
    return exact;
  }
  return p;
}

double richardson_limit(const int (&n)[3], const double (&value)[3]) {
  // Solve [1, 1/N, 1/N^2] [a b c]^T = value by Lagrange interpolation in h = 1/N at h = 0.
  const double h[3] = {1.0 / n[0], 1.0 / n[1], 1.0 / n[2]};
  double a = 0.0;
  for (int i = 0; i < 3; ++i) {
    double l = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (j != i) l *= (0.0 - h[j]) / (h[i] - h[j]);
    }
    a += l * value[i];
  }
  return a;
}

AsymptoticEstimate asymptotic_product(Inequality ineq, int n_max, const QuadratureRule& rule) {
  if (n_max < 20) throw InvalidArgument("asymptotic_product needs n_max >= 20");
  const int top = n_max % 2 == 0 ? n_max : n_max - 1;
  AsymptoticEstimate est;
  for (int n = 4; n <= top; n += 2) {
    std::optional<double> v;
    if (ineq == Inequality::mk) {
      v = mk_critical_product(n);
    } else {
      v = critical_efficiency(n, 1.0, ineq, rule);
    }
    if (v) {
      est.n_values.push_back(n);
      est.values.push_back(*v);
    }
  }
  if (est.values.size() < 3) throw InternalError("too few violating N values to extrapolate");
  const std::size_t k = est.values.size();
  const int ns[3] = {est.n_values[k - 3], est.n_values[k - 2], est.n_values[k - 1]};
  const double vs[3] = {est.values[k - 3], est.values[k - 2], est.values[k - 1]};
  est.extrapolated = richardson_limit(ns, vs);
  est.tail_value = vs[2];
  est.tail_n = ns[2];
  return est;
}

CriticalCurve critical_curve(Inequality ineq, CriticalParameter parameter, const std::vector<int>& n_values,
                             double other, const QuadratureRule& rule) {
  if (n_values.empty()) throw InvalidArgument("critical curve needs at least one N");
  CriticalCurve curve;
  curve.inequality = ineq;
  curve.parameter = parameter;
  curve.n_values = n_values;
  for (int n : n_values) {
    switch (parameter) {
      case CriticalParameter::efficiency:
        curve.critical_values.push_back(critical_efficiency(n, other, ineq, rule));
        break;
      case CriticalParameter::purity:
        curve.critical_values.push_back(critical_purity(n, other, ineq, rule));
        break;
      case CriticalParameter::product:
        curve.critical_values.push_back(ineq == Inequality::mk ? std::optional<double>(mk_critical_product(n))
                                                               : critical_efficiency(n, 1.0, ineq, rule));
        break;
    }
  }
  return curve;
}

void write_csv(const CriticalCurve& curve, std::ostream& out, bool header) {
  if (header) out << "N,value,parameter,inequality_id,converged_flag\n";
  char buf[128];
  for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
    const auto& v = curve.critical_values[i];
    if (v) {
      std::snprintf(buf, sizeof buf, "%d,%.12g,%s,%s,1\n", curve.n_values[i], *v,
                    std::string(to_string(curve.parameter)).c_str(), std::string(to_string(curve.inequality)).c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%d,,%s,%s,0\n", curve.n_values[i], std::string(to_string(curve.parameter)).c_str(),
                    std::string(to_string(curve.inequality)).c_str());
    }
    out << buf;
  }
}

}  // namespace cvbell
