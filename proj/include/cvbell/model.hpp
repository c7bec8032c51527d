#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cvbell/measurement_function.hpp"
#include "cvbell/quadrature.hpp"

namespace cvbell {

using Complex = std::complex<double>;

inline constexpr int kMaxDensityModes = 14;

/// Physical scenario: N modes in the GHZ-type state
///   (|0>^r |1>^(N-r) + |1>^r |0>^(N-r)) / sqrt(2)
/// mixed with its occupation-basis dephased version at weight 1 - purity,
/// then detected with efficiency eta on every mode.
struct StateSpec {
  int n_modes = 2;
  int r_split = 1;
  double purity = 1.0;
  double efficiency = 1.0;

  /// Throws InvalidArgument when any bound is violated.
  void validate() const;
};

/// Per-site quadrature phases. Angles are reduced to (-pi, pi].
class AngleConfig {
 public:
  AngleConfig() = default;
  AngleConfig(std::vector<double> theta, std::vector<double> theta_prime);

  std::size_t size() const noexcept { return theta_.size(); }
  const std::vector<double>& theta() const noexcept { return theta_; }
  const std::vector<double>& theta_prime() const noexcept { return theta_prime_; }

  /// Swaps the roles of theta and theta'.
  AngleConfig exchanged() const { return AngleConfig(theta_prime_, theta_); }

 private:
  std::vector<double> theta_;
  std::vector<double> theta_prime_;
};

double reduce_angle(double a);

/// theta_k = 0 on every site, theta'_k = +pi/2 for k < r (lowering-type site
/// operator) and -pi/2 for k >= r (raising-type). Sites are 0-based here.
AngleConfig orthogonal_angles(int n, int r);

/// Density operator on the <=1-photon-per-mode subspace, stored sparsely.
/// Basis index bit k is the photon number of mode k (mode 0 is the
/// least-significant bit).
class DensityMatrix {
 public:
  using Key = std::pair<std::uint32_t, std::uint32_t>;

  explicit DensityMatrix(int n_modes);

  int n_modes() const noexcept { return n_modes_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_modes_; }

  Complex operator()(std::uint32_t row, std::uint32_t col) const;
  void add(std::uint32_t row, std::uint32_t col, Complex value);

  const std::map<Key, Complex>& entries() const noexcept { return entries_; }

  Complex trace() const;
  /// Largest |rho_ij - conj(rho_ji)|.
  double hermiticity_defect() const;
  /// Dense copy; only for n_modes <= 12.
  Eigen::MatrixXcd to_dense() const;
  double min_eigenvalue() const;

  /// Sparse JSON dump: {"n_modes": N, "entries": [{"row": "0101", "col": ..., "re": .., "im": ..}]}.
  /// Bitstrings list mode 0 first.
  std::string to_json() const;

  DensityMatrix& operator*=(double c);
  DensityMatrix& operator+=(const DensityMatrix& other);

 private:
  int n_modes_;
  std::map<Key, Complex> entries_;
};

std::string occupation_string(std::uint32_t index, int n_modes);

/// GHZ-type state with purity mixing and per-mode loss applied.
DensityMatrix density_matrix(const StateSpec& spec);

/// Kraus elements K0 = |0><0| + sqrt(eta)|1><1|, K1 = sqrt(1-eta)|0><1|.
std::array<Eigen::Matrix2cd, 2> amplitude_damping_kraus(double eta);

/// Applies the same single-mode channel independently to every mode.
DensityMatrix apply_local_channel(const DensityMatrix& rho, const std::array<Eigen::Matrix2cd, 2>& kraus);

/// |v_0> (x) |v_1> (x) ... for single-mode states a|0> + b|1> (normalized internally).
DensityMatrix product_state(const std::vector<std::array<Complex, 2>>& modes);

DensityMatrix vacuum_state(int n_modes);

/// <m| f(X^theta) |n> with X^theta = (a e^{-i theta} + a^dag e^{i theta}) / 2.
Complex single_mode_element(const MeasurementFunction& f, int m, int n, double theta, const QuadratureRule& rule);

/// Matrix elements of the site operators in the {|0>, |1>} basis.
///   lhs = f(X^theta) + i g(X^theta')   (enters |<prod F_k>|^2)
///   rhs = f(X^theta)^2 + g(X^theta')^2 (enters <prod (f^2 + g^2)>)
struct SiteOperator {
  Eigen::Matrix2cd lhs;
  Eigen::Matrix2cd rhs;
};

/// Fock-basis building blocks of an odd function, angle independent.
struct FockMoments {
  double off_diagonal = 0.0;  ///< int f psi_0 psi_1
  double square_vacuum = 0.0; ///< int f^2 psi_0^2
  double square_one = 0.0;    ///< int f^2 psi_1^2
};

FockMoments fock_moments(const GaussianMoments& m);
FockMoments fock_moments(const MeasurementFunction& f, const QuadratureRule& rule);

SiteOperator site_operator(const FockMoments& f, const FockMoments& g, double theta, double theta_prime);

SiteOperator site_operator(const MeasurementFunction& f, const MeasurementFunction& g, double theta,
                           double theta_prime, const QuadratureRule& rule);

}  // namespace cvbell
