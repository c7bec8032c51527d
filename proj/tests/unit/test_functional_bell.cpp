#include <cmath>

#include "cvbell/errors.hpp"
#include "cvbell/functional_bell.hpp"
#include "doctest.h"

using namespace cvbell;

namespace {
const QuadratureRule& rule() {
  static const QuadratureRule r = gauss_hermite_rule(kDefaultQuadratureOrder);
  return r;
}
constexpr double kEpsilonIdeal = 2.96483621774871;
}  // namespace

TEST_CASE("ideal fixed point") {
  const auto s = solve_epsilon_even(1.0, rule());
  CHECK(s.epsilon_ideal == doctest::Approx(kEpsilonIdeal).epsilon(1e-10));
  CHECK(s.epsilon_lossy == doctest::Approx(kEpsilonIdeal).epsilon(1e-10));
  CHECK(s.residual < 1e-10);
  // eps = 4 I0 / I at the solution
  const auto k = kernel_integrals(MeasurementFunction::optimal(s.epsilon_ideal), rule());
  CHECK(4.0 * k.i_zero / k.i_cross == doctest::Approx(s.epsilon_ideal).epsilon(1e-10));
}

TEST_CASE("fixed point is stable across quadrature orders") {
  const double hi = solve_epsilon_even(1.0, gauss_hermite_rule(400)).epsilon_ideal;
  const double lo = solve_epsilon_even(1.0, gauss_hermite_rule(150)).epsilon_ideal;
  CHECK(lo == doctest::Approx(hi).epsilon(1e-9));
}

TEST_CASE("lossy epsilon is self-consistent and matches the numeric optimum") {
  for (double eta : {0.9, 0.8}) {
    const auto s = solve_epsilon_even(eta, rule());
    CHECK(s.epsilon_lossy == doctest::Approx(lossy_epsilon_map(eta, s.epsilon_ideal)).epsilon(1e-10));
    const auto num = optimize_epsilon_numeric(StateSpec{6, 3, 1.0, eta}, rule());
    CHECK(num.epsilon == doctest::Approx(s.epsilon_lossy).epsilon(1e-5));
  }
  CHECK(lossy_epsilon_map(1.0, 3.0) == doctest::Approx(3.0));
}

TEST_CASE("odd readings coincide without loss and the printed one is the stationary point") {
  for (int n : {3, 5, 7}) {
    const auto printed = solve_epsilon_odd(n, 1.0, rule(), OddLossReading::printed);
    const auto symmetric = solve_epsilon_odd(n, 1.0, rule(), OddLossReading::symmetric);
    CHECK(*printed.epsilon_odd == doctest::Approx(*symmetric.epsilon_odd).epsilon(1e-12));

    const auto lossy = solve_epsilon_odd(n, 0.8, rule(), OddLossReading::printed);
    const auto num = optimize_epsilon_numeric(StateSpec{n, n / 2, 1.0, 0.8}, rule());
    CHECK(*lossy.epsilon_odd == doctest::Approx(num.epsilon).epsilon(1e-6));
  }
  CHECK(*solve_epsilon_odd(5, 1.0, rule()).epsilon_odd == doctest::Approx(3.22116992).epsilon(1e-7));
  CHECK_THROWS_AS(solve_epsilon_odd(4, 1.0, rule()), InvalidArgument);
}

TEST_CASE("onset of violation") {
  CHECK(bell_value(StateSpec{4, 2, 1.0, 1.0}, rule()).ratio <= 1.0);
  CHECK(bell_value(StateSpec{5, 2, 1.0, 1.0}, rule()).ratio > 1.0);
  CHECK(bell_value(StateSpec{6, 3, 1.0, 1.0}, rule()).ratio == doctest::Approx(1.78185565704).epsilon(1e-10));
  CHECK(cfrd_bell_value(StateSpec{9, 4, 1.0, 1.0}, rule()).ratio <= 1.0);
  CHECK(cfrd_bell_value(StateSpec{10, 5, 1.0, 1.0}, rule()).ratio > 1.0);
}

TEST_CASE("CFRD closed form") {
  // 2^{N-1} / (3^{N-r} + 3^r) at eta = p = 1
  CHECK(cfrd_bell_value(StateSpec{10, 5, 1.0, 1.0}, rule()).ratio == doctest::Approx(512.0 / 486.0).epsilon(1e-12));
}

TEST_CASE("optimal function dominates CFRD and B grows with eta and p") {
  for (int n = 2; n <= 20; ++n) {
    const StateSpec s{n, n / 2, 1.0, 1.0};
    CHECK(bell_value(s, rule()).ratio >= cfrd_bell_value(s, rule()).ratio);
    double prev = 0.0;
    for (double eta = 0.3; eta <= 1.0; eta += 0.1) {
      const double b = bell_value(StateSpec{n, n / 2, 1.0, eta}, rule()).ratio;
      CHECK(b > prev);
      prev = b;
    }
  }
  CHECK(bell_value(StateSpec{6, 3, 0.5, 1.0}, rule()).ratio ==
        doctest::Approx(0.25 * bell_value(StateSpec{6, 3, 1.0, 1.0}, rule()).ratio));
}

TEST_CASE("general closed form matches the balanced one") {
  const StateSpec s{8, 4, 0.9, 0.85};
  const auto eps = solve_epsilon_even(0.85, rule()).optimum();
  const auto k = kernel_integrals(MeasurementFunction::optimal(eps), rule());
  CHECK(orthogonal_bell_value(s, k).ratio == doctest::Approx(bell_value(s, rule()).ratio).epsilon(1e-12));
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(bell_value(StateSpec{6, 1, 1.0, 1.0}, rule()), InvalidArgument);
  CHECK_THROWS_AS(bell_value(StateSpec{1, 0, 1.0, 1.0}, rule()), InvalidArgument);
  CHECK_THROWS_AS(bell_value(StateSpec{6, 3, 1.0, 1.2}, rule()), InvalidArgument);
}

TEST_CASE("large N stays finite") {
  const auto b = bell_value(StateSpec{200, 100, 1.0, 1.0}, rule());
  CHECK(std::isfinite(b.ratio));
  CHECK(b.ratio > 1e10);
}

TEST_CASE("mapping the lossless fixed point does not give the lossy optimum") {
  const double eps1 = solve_epsilon_even(1.0, rule()).epsilon_ideal;
  for (double eta : {0.9, 0.8, 0.6}) {
    const double naive = lossy_epsilon_map(eta, eps1);
    const auto num = optimize_epsilon_numeric(StateSpec{6, 3, 1.0, eta}, rule());
    const double self = solve_epsilon_even(eta, rule()).epsilon_lossy;
    CHECK(std::abs(naive - num.epsilon) > 1e-3 * num.epsilon);
    CHECK(std::abs(self - num.epsilon) < 1e-5 * num.epsilon);
    const auto k = kernel_integrals(MeasurementFunction::optimal(naive), rule());
    CHECK(orthogonal_bell_value(StateSpec{6, 3, 1.0, eta}, k).ratio < num.result.ratio);
  }
  CHECK(lossy_epsilon_map(0.5, 3.0) == doctest::Approx(3.0 / 2.5));
}

TEST_CASE("odd epsilon approaches the even one at large N") {
  const double even = solve_epsilon_even(1.0, rule()).epsilon_ideal;
  const double odd = *solve_epsilon_odd(101, 1.0, rule()).epsilon_odd;
  CHECK(std::abs(odd / even - 1.0) < 1e-2);
  const auto num = optimize_epsilon_numeric(StateSpec{5, 2, 1.0, 1.0}, rule());
  CHECK(*solve_epsilon_odd(5, 1.0, rule()).epsilon_odd == doctest::Approx(num.epsilon).epsilon(1e-4));
}
