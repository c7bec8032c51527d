#include "cvbell/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "cvbell/errors.hpp"

namespace cvbell {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

std::uint32_t bit(std::uint32_t index, int k) { return (index >> k) & 1U; }

}  // namespace

void StateSpec::validate() const {
  if (n_modes < 1) throw InvalidArgument("n_modes must be >= 1");
  if (r_split < 0 || r_split > n_modes) throw InvalidArgument("r_split must lie in [0, n_modes]");
  if (!(purity >= 0.0 && purity <= 1.0)) throw InvalidArgument("purity must lie in [0, 1]");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
}

double reduce_angle(double a) {
  if (!std::isfinite(a)) throw InvalidArgument("angles must be finite");
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

AngleConfig::AngleConfig(std::vector<double> theta, std::vector<double> theta_prime)
    : theta_(std::move(theta)), theta_prime_(std::move(theta_prime)) {
  if (theta_.size() != theta_prime_.size()) {
    throw InvalidArgument("theta and theta' must have the same length");
  }
  for (auto& a : theta_) a = reduce_angle(a);
  for (auto& a : theta_prime_) a = reduce_angle(a);
}

AngleConfig orthogonal_angles(int n, int r) {
  if (n < 1 || r < 0 || r > n) throw InvalidArgument("orthogonal_angles: need 0 <= r <= n, n >= 1");
  std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
  std::vector<double> theta_prime(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) theta_prime[static_cast<std::size_t>(k)] = k < r ? kPi / 2 : -kPi / 2;
  return AngleConfig(std::move(theta), std::move(theta_prime));
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(int n_modes) : n_modes_(n_modes) {
  if (n_modes < 1) throw InvalidArgument("density matrix needs at least one mode");
  if (n_modes > 31) throw ResourceLimitError("density matrix index exceeds 31 modes");
}

Complex DensityMatrix::operator()(std::uint32_t row, std::uint32_t col) const {
  const auto it = entries_.find({row, col});
  return it == entries_.end() ? Complex{} : it->second;
}

void DensityMatrix::add(std::uint32_t row, std::uint32_t col, Complex value) {
  if (row >= dim() || col >= dim()) throw InvalidArgument("density matrix index out of range");
  if (value == Complex{}) return;
  entries_[{row, col}] += value;
}

Complex DensityMatrix::trace() const {
  Complex t{};
  for (const auto& [key, v] : entries_) {
    if (key.first == key.second) t += v;
  }
  return t;
}

double DensityMatrix::hermiticity_defect() const {
  double worst = 0.0;
  for (const auto& [key, v] : entries_) {
    worst = std::max(worst, std::abs(v - std::conj((*this)(key.second, key.first))));
  }
  return worst;
}

Eigen::MatrixXcd DensityMatrix::to_dense() const {
  if (n_modes_ > 12) throw ResourceLimitError("dense density matrix limited to 12 modes");
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& [key, v] : entries_) m(key.first, key.second) = v;
  return m;
}

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd m = to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::string occupation_string(std::uint32_t index, int n_modes) {
  std::string s(static_cast<std::size_t>(n_modes), '0');
  for (int k = 0; k < n_modes; ++k) {
    if (bit(index, k)) s[static_cast<std::size_t>(k)] = '1';
  }
  return s;
}

std::string DensityMatrix::to_json() const {
  nlohmann::json j;
  j["n_modes"] = n_modes_;
  auto& arr = j["entries"] = nlohmann::json::array();
  for (const auto& [key, v] : entries_) {
    arr.push_back({{"row", occupation_string(key.first, n_modes_)},
                   {"col", occupation_string(key.second, n_modes_)},
                   {"re", v.real()},
                   {"im", v.imag()}});
  }
  return j.dump(2);
}

DensityMatrix& DensityMatrix::operator*=(double c) {
  for (auto& [key, v] : entries_) v *= c;
  return *this;
}

DensityMatrix& DensityMatrix::operator+=(const DensityMatrix& other) {
  if (other.n_modes_ != n_modes_) throw InvalidArgument("cannot add density matrices of different size");
  for (const auto& [key, v] : other.entries_) entries_[key] += v;
  return *this;
}

// ---------------------------------------------------------------------------

std::array<Eigen::Matrix2cd, 2> amplitude_damping_kraus(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("damping efficiency must lie in [0, 1]");
  Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(eta);
  k1(0, 1) = std::sqrt(1.0 - eta);
  return {k0, k1};
}

DensityMatrix apply_local_channel(const DensityMatrix& rho, const std::array<Eigen::Matrix2cd, 2>& kraus) {
  const int n = rho.n_modes();
  std::map<DensityMatrix::Key, Complex> current = rho.entries();
  for (int k = 0; k < n; ++k) {
    std::map<DensityMatrix::Key, Complex> next;
    const std::uint32_t mask = 1U << k;
    for (const auto& [key, v] : current) {
      const auto [row, col] = key;
      const int a = static_cast<int>(bit(row, k));
      const int b = static_cast<int>(bit(col, k));
      for (const auto& K : kraus) {
        for (int a2 = 0; a2 < 2; ++a2) {
          const Complex ka = K(a2, a);
          if (ka == Complex{}) continue;
          for (int b2 = 0; b2 < 2; ++b2) {
            const Complex kb = std::conj(K(b2, b));
            if (kb == Complex{}) continue;
            const std::uint32_t row2 = (row & ~mask) | (static_cast<std::uint32_t>(a2) << k);
            const std::uint32_t col2 = (col & ~mask) | (static_cast<std::uint32_t>(b2) << k);
            next[{row2, col2}] += ka * v * kb;
          }
        }
      }
    }
    current = std::move(next);
  }
  DensityMatrix out(n);
  for (const auto& [key, v] : current) out.add(key.first, key.second, v);
  return out;
}

DensityMatrix density_matrix(const StateSpec& spec) {
  spec.validate();
  if (spec.n_modes > kMaxDensityModes) {
    throw ResourceLimitError("density matrix materialization is limited to " + std::to_string(kMaxDensityModes) +
                             " modes");
  }
  const int n = spec.n_modes;
  const int r = spec.r_split;
  // |a> = |0>^r |1>^(N-r): modes r..N-1 occupied. |b> is its complement.
  const std::uint32_t full = (1U << n) - 1U;
  const std::uint32_t a = full & ~((1U << r) - 1U);
  const std::uint32_t b = full & ~a;

  DensityMatrix rho(n);
  // Diagonal is shared by the pure state and by the dephased mixture.
  rho.add(a, a, 0.5);
  rho.add(b, b, 0.5);
  rho.add(a, b, 0.5 * spec.purity);
  rho.add(b, a, 0.5 * spec.purity);
  if (spec.efficiency == 1.0) return rho;
  return apply_local_channel(rho, amplitude_damping_kraus(spec.efficiency));
}

DensityMatrix product_state(const std::vector<std::array<Complex, 2>>& modes) {
  const int n = static_cast<int>(modes.size());
  DensityMatrix rho(n);
  std::vector<std::array<Complex, 2>> unit = modes;
  for (auto& v : unit) {
    const double norm = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    if (!(norm > 0.0)) throw InvalidArgument("product_state: zero single-mode vector");
    v[0] /= norm;
    v[1] /= norm;
  }
  const std::uint32_t d = 1U << n;
  std::vector<Complex> amp(d);
  for (std::uint32_t i = 0; i < d; ++i) {
    Complex c = 1.0;
    for (int k = 0; k < n; ++k) c *= unit[static_cast<std::size_t>(k)][bit(i, k)];
    amp[i] = c;
  }
  for (std::uint32_t i = 0; i < d; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) rho.add(i, j, amp[i] * std::conj(amp[j]));
  }
  return rho;
}

DensityMatrix vacuum_state(int n_modes) {
  DensityMatrix rho(n_modes);
  rho.add(0, 0, 1.0);
  return rho;
}

// ---------------------------------------------------------------------------

// psi_0(x) = (2/pi)^{1/4} e^{-x^2}, psi_1(x) = (2/pi)^{1/4} 2x e^{-x^2}; the
// Gaussian factor lives in the quadrature weight.
Complex single_mode_element(const MeasurementFunction& f, int m, int n, double theta, const QuadratureRule& rule) {
  if ((m != 0 && m != 1) || (n != 0 && n != 1)) throw InvalidArgument("Fock indices must be 0 or 1");
  const Complex phase = std::polar(1.0, theta * (m - n));
  if (f.is_sign_bin()) {
    return m == n ? Complex{} : phase * (kSqrt2OverPi * 2.0 * gaussian_moments(f, rule).first);
  }
  const double integral = integrate(rule, [&](double x) {
    const double poly = (m == 0 ? 1.0 : 2.0 * x) * (n == 0 ? 1.0 : 2.0 * x);
    return f(x) * poly;
  });
  return phase * (kSqrt2OverPi * integral);
}

FockMoments fock_moments(const GaussianMoments& m) {
  return {kSqrt2OverPi * 2.0 * m.first, kSqrt2OverPi * m.square, kSqrt2OverPi * 4.0 * m.second_square};
}

FockMoments fock_moments(const MeasurementFunction& f, const QuadratureRule& rule) {
  return fock_moments(gaussian_moments(f, rule));
}

SiteOperator site_operator(const FockMoments& f, const FockMoments& g, double theta, double theta_prime) {
  const Complex i{0.0, 1.0};
  SiteOperator op;
  op.lhs = Eigen::Matrix2cd::Zero();
  op.lhs(0, 1) = std::polar(1.0, -theta) * f.off_diagonal + i * std::polar(1.0, -theta_prime) * g.off_diagonal;
  op.lhs(1, 0) = std::polar(1.0, theta) * f.off_diagonal + i * std::polar(1.0, theta_prime) * g.off_diagonal;
  op.rhs = Eigen::Matrix2cd::Zero();
  op.rhs(0, 0) = f.square_vacuum + g.square_vacuum;
  op.rhs(1, 1) = f.square_one + g.square_one;
  return op;
}

SiteOperator site_operator(const MeasurementFunction& f, const MeasurementFunction& g, double theta,
                           double theta_prime, const QuadratureRule& rule) {
  require_odd(f, rule);
  require_odd(g, rule);
  return site_operator(fock_moments(f, rule), fock_moments(g, rule), theta, theta_prime);
}

}  // namespace cvbell
