#pragma once

#include <string>
#include <variant>
#include <vector>

namespace cvbell {

/// Real odd functions of a single quadrature outcome, as used on each site
/// of the functional-moment inequality.
///
/// Every variant carries an overall multiplier (default 1) so that the
/// scale invariance of the Bell ratio can be exercised directly.
class MeasurementFunction {
 public:
  /// x / (1 + epsilon x^2), epsilon > 0.
  struct Optimal {
    double epsilon;
  };
  /// f(x) = x. Recovers the original CFRD moments.
  struct Identity {};
  /// +1 for x >= 0, -1 otherwise.
  struct SignBin {};
  /// Tabulated values on the positive quadrature nodes, extended to x < 0 by
  /// oddness. Between nodes the value is interpolated linearly; beyond the
  /// last node it decays as 1/x; below the first node it is linear through 0.
  struct Basis {
    std::vector<double> abscissae;
    std::vector<double> values;
  };

  using Variant = std::variant<Optimal, Identity, SignBin, Basis>;

  static MeasurementFunction optimal(double epsilon);
  static MeasurementFunction identity();
  static MeasurementFunction sign_bin();
  static MeasurementFunction basis(std::vector<double> abscissae, std::vector<double> values);

  double operator()(double x) const;

  /// Same function multiplied by c.
  MeasurementFunction scaled(double c) const;

  const Variant& variant() const noexcept { return variant_; }
  double scale() const noexcept { return scale_; }

  bool is_sign_bin() const noexcept { return std::holds_alternative<SignBin>(variant_); }

  /// Short tag used in result metadata, e.g. "optimal(eps=2.96483621775)".
  std::string id() const;

 private:
  explicit MeasurementFunction(Variant v, double scale = 1.0) : variant_(std::move(v)), scale_(scale) {}

  Variant variant_;
  double scale_ = 1.0;
};

}  // namespace cvbell
