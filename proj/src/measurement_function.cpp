#include "cvbell/measurement_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cvbell/errors.hpp"

namespace cvbell {

namespace {

double eval_basis(const MeasurementFunction::Basis& b, double x) {
  const double ax = std::abs(x);
  const auto& xs = b.abscissae;
  const auto& ys = b.values;
  double y;
  if (ax <= xs.front()) {
    y = ys.front() * ax / xs.front();
  } else if (ax >= xs.back()) {
    y = ys.back() * xs.back() / ax;
  } else {
    const auto hi = std::upper_bound(xs.begin(), xs.end(), ax);
    const auto i = static_cast<std::size_t>(hi - xs.begin());
    if (xs[i - 1] == ax) {
      y = ys[i - 1];
    } else {
      const double t = (ax - xs[i - 1]) / (xs[i] - xs[i - 1]);
      y = (1.0 - t) * ys[i - 1] + t * ys[i];
    }
  }
  return x < 0 ? -y : y;
}

}  // namespace

MeasurementFunction MeasurementFunction::optimal(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("optimal measurement function requires a finite epsilon > 0");
  }
  return MeasurementFunction(Optimal{epsilon});
}

MeasurementFunction MeasurementFunction::identity() { return MeasurementFunction(Identity{}); }

MeasurementFunction MeasurementFunction::sign_bin() { return MeasurementFunction(SignBin{}); }

MeasurementFunction MeasurementFunction::basis(std::vector<double> abscissae, std::vector<double> values) {
  if (abscissae.empty() || abscissae.size() != values.size()) {
    throw InvalidArgument("basis function needs matching, non-empty abscissae and values");
  }
  if (!(abscissae.front() > 0.0)) {
    throw InvalidArgument("basis abscissae must be strictly positive");
  }
  for (std::size_t i = 1; i < abscissae.size(); ++i) {
    if (!(abscissae[i] > abscissae[i - 1])) {
      throw InvalidArgument("basis abscissae must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("basis values must be finite");
  }
  return MeasurementFunction(Basis{std::move(abscissae), std::move(values)});
}

double MeasurementFunction::operator()(double x) const {
  const double base = std::visit(
      [x](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Optimal>) {
          return x / (1.0 + v.epsilon * x * x);
        } else if constexpr (std::is_same_v<T, Identity>) {
          return x;
        } else if constexpr (std::is_same_v<T, SignBin>) {
          return x >= 0.0 ? 1.0 : -1.0;
        } else {
          return eval_basis(v, x);
        }
      },
      variant_);
  return scale_ * base;
}

MeasurementFunction MeasurementFunction::scaled(double c) const {
  if (!std::isfinite(c) || c == 0.0) throw InvalidArgument("scale factor must be finite and nonzero");
  return MeasurementFunction(variant_, scale_ * c);
}

std::string MeasurementFunction::id() const {
  char buf[64];
  std::string base = std::visit(
      [&buf](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Optimal>) {
          std::snprintf(buf, sizeof buf, "optimal(eps=%.12g)", v.epsilon);
          return buf;
        } else if constexpr (std::is_same_v<T, Identity>) {
          return "identity";
        } else if constexpr (std::is_same_v<T, SignBin>) {
          return "sign_bin";
        } else {
          return "basis(" + std::to_string(v.values.size()) + ")";
        }
      },
      variant_);
  if (scale_ != 1.0) {
    std::snprintf(buf, sizeof buf, "%.6g*", scale_);
    base = buf + base;
  }
  return base;
}

}  // namespace cvbell
