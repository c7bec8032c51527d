#include "cvbell/variational.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cvbell/errors.hpp"

namespace cvbell {

namespace {

struct PositiveNodes {
  std::vector<double> x;
  std::vector<double> w;
};

PositiveNodes positive_nodes(const QuadratureRule& rule) {
  PositiveNodes p;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    if (rule.nodes[i] > 0.0) {
      p.x.push_back(rule.nodes[i]);
      p.w.push_back(rule.weights[i]);
    }
  }
  return p;
}

// Fock moments of the odd extension of a tabulated function. The node at 0,
// if any, carries f(0) = 0.
FockMoments tabulated_moments(const PositiveNodes& nodes, const std::vector<double>& values) {
  GaussianMoments m;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w2 = 2.0 * nodes.w[i];
    const double x = nodes.x[i];
    const double v = values[i];
    m.first += w2 * x * v;
    m.square += w2 * v * v;
    m.second_square += w2 * x * x * v * v;
  }
  return fock_moments(m);
}

// Ratio evaluator over node values at fixed state and angles.
class RatioProblem {
 public:
  RatioProblem(const StateSpec& spec, const QuadratureRule& rule)
      : nodes_(positive_nodes(rule)),
        rho_(density_matrix(spec)),
        angles_(orthogonal_angles(spec.n_modes, spec.r_split)) {}

  const PositiveNodes& nodes() const { return nodes_; }

  BellResult evaluate(const std::vector<double>& f, const std::vector<double>& g) const {
    return cvbell::evaluate(rho_, tabulated_moments(nodes_, f), tabulated_moments(nodes_, g), angles_);
  }

  double ratio(const std::vector<double>& f, const std::vector<double>& g) const { return evaluate(f, g).ratio; }

 private:
  PositiveNodes nodes_;
  DensityMatrix rho_;
  AngleConfig angles_;
};

void check_nodes(const FreeFunction& f, const PositiveNodes& nodes) {
  if (f.abscissae.size() != nodes.x.size() || f.node_values.size() != nodes.x.size()) {
    throw InvalidArgument("free function does not match the positive nodes of the quadrature rule");
  }
  for (std::size_t i = 0; i < nodes.x.size(); ++i) {
    if (std::abs(f.abscissae[i] - nodes.x[i]) > 1e-14 * std::max(1.0, nodes.x[i])) {
      throw InvalidArgument("free function abscissae differ from the quadrature nodes");
    }
  }
  for (double v : f.node_values) {
    if (!std::isfinite(v)) throw InvalidArgument("free function has non-finite node values");
  }
}

// Optimizer coordinates: u_i = sqrt(w_i) v_i for every node value of f, and
// in relaxed mode of g as well. The ratio is scale invariant, so its gradient
// is orthogonal to u and the scale direction costs BFGS nothing; the gauge is
// restored by rescaling after every accepted step.
class Coordinates {
 public:
  Coordinates(const PositiveNodes& nodes, bool relaxed) : sqrt_w_(nodes.w.size()), relaxed_(relaxed) {
    for (std::size_t i = 0; i < nodes.w.size(); ++i) sqrt_w_[i] = std::sqrt(nodes.w[i]);
  }

  Eigen::Index size() const {
    const auto m = static_cast<Eigen::Index>(sqrt_w_.size());
    return relaxed_ ? 2 * m : m;
  }

  Eigen::VectorXd pack(const std::vector<double>& f, const std::vector<double>& g) const {
    const std::size_t m = sqrt_w_.size();
    Eigen::VectorXd z(size());
    for (std::size_t i = 0; i < m; ++i) z[static_cast<Eigen::Index>(i)] = sqrt_w_[i] * f[i];
    if (relaxed_) {
      for (std::size_t i = 0; i < m; ++i) z[static_cast<Eigen::Index>(m + i)] = sqrt_w_[i] * g[i];
    }
    return z;
  }

  void unpack(const Eigen::VectorXd& z, std::vector<double>& f, std::vector<double>& g) const {
    const std::size_t m = sqrt_w_.size();
    f.resize(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = z[static_cast<Eigen::Index>(i)] / sqrt_w_[i];
    if (relaxed_) {
      g.resize(m);
      for (std::size_t i = 0; i < m; ++i) g[i] = z[static_cast<Eigen::Index>(m + i)] / sqrt_w_[i];
    } else {
      g = f;
    }
  }

  /// Value of f at the gauge node.
  double gauge_entry(const Eigen::VectorXd& z) const { return z[0] / sqrt_w_[0]; }

  /// Converts d/du into d/dv, dropping the gauge entry (held fixed).
  Eigen::VectorXd to_value_gradient(const Eigen::VectorXd& grad_u) const {
    const std::size_t m = sqrt_w_.size();
    Eigen::VectorXd out = grad_u;
    for (std::size_t i = 0; i < m; ++i) out[static_cast<Eigen::Index>(i)] *= sqrt_w_[i];
    if (relaxed_) {
      for (std::size_t i = 0; i < m; ++i) out[static_cast<Eigen::Index>(m + i)] *= sqrt_w_[i];
    }
    return out.tail(out.size() - 1);
  }

 private:
  std::vector<double> sqrt_w_;
  bool relaxed_;
};

template <class F>
Eigen::VectorXd central_gradient(F&& objective, const Eigen::VectorXd& z, double rel_step) {
  const double scale = std::max(z.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd grad(z.size());
  Eigen::VectorXd probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = rel_step * std::max(std::abs(z[i]), scale);
    probe[i] = z[i] + h;
    const double up = objective(probe);
    probe[i] = z[i] - h;
    const double down = objective(probe);
    probe[i] = z[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace

FreeFunction FreeFunction::from(const MeasurementFunction& f, const QuadratureRule& rule, double norm_gauge) {
  const PositiveNodes nodes = positive_nodes(rule);
  FreeFunction out;
  out.abscissae = nodes.x;
  out.norm_gauge = norm_gauge;
  out.node_values.reserve(nodes.x.size());
  for (double x : nodes.x) out.node_values.push_back(f(x));
  out.apply_gauge();
  return out;
}

MeasurementFunction FreeFunction::to_function() const { return MeasurementFunction::basis(abscissae, node_values); }

void FreeFunction::apply_gauge() {
  if (abscissae.empty() || node_values.size() != abscissae.size()) {
    throw InvalidArgument("free function needs matching, non-empty abscissae and values");
  }
  if (!(node_values.front() > 0.0) || !(norm_gauge > 0.0)) {
    throw InvalidArgument("gauge needs a positive value at the smallest node");
  }
  const double c = norm_gauge * abscissae.front() / node_values.front();
  for (double& v : node_values) v *= c;
}

VariationalResult optimize_function(const StateSpec& spec, const QuadratureRule& rule, const FreeFunction& init,
                                    const VariationalOptions& options) {
  spec.validate();
  if (spec.n_modes > 10) throw InvalidArgument("variational optimization is limited to 10 modes");
  const RatioProblem problem(spec, rule);
  FreeFunction start = init;
  check_nodes(start, problem.nodes());
  start.apply_gauge();
  if (start.node_values.size() < 2) throw InvalidArgument("need at least two positive nodes");

  const double gauge_value = start.node_values.front();
  const Coordinates coords(problem.nodes(), options.relaxed);

  std::vector<double> fv;
  std::vector<double> gv;
  auto log_ratio = [&](const Eigen::VectorXd& z) {
    coords.unpack(z, fv, gv);
    return std::log(problem.ratio(fv, gv));
  };

  Eigen::VectorXd z = coords.pack(start.node_values, start.node_values);
  double value = log_ratio(z);
  Eigen::VectorXd grad = central_gradient(log_ratio, z, options.fd_step);
  const Eigen::Index dim = z.size();
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);

  VariationalResult out;
  out.ratio_history.push_back(std::exp(value));
  auto value_gradient_norm = [&](double v, const Eigen::VectorXd& g) {
    return std::exp(v) * coords.to_value_gradient(g).cwiseAbs().maxCoeff();
  };

  int iter = 0;
  double gnorm = value_gradient_norm(value, grad);
  auto fill = [&](VariationalResult& r) {
    coords.unpack(z, fv, gv);
    r.f = start;
    r.f.node_values = fv;
    r.g = start;
    r.g.node_values = gv;
    r.result = problem.evaluate(fv, gv);
    r.result.function_id = options.relaxed ? "free(f,g)" : "free";
    r.iterations = iter;
    r.gradient_norm = gnorm;
  };
  auto fail = [&](const char* what) {
    if (options.best_so_far) {
      *options.best_so_far = out;
      fill(*options.best_so_far);
    }
    throw ConvergenceError(what, gnorm);
  };
  bool fresh_metric = true;
  while (gnorm >= options.gradient_tolerance) {
    if (iter >= options.max_iterations) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "variational ascent did not converge in %d iterations (gradient %.3g, ratio %.12g)",
                    options.max_iterations, gnorm, std::exp(value));
      fail(buf);
    }
    ++iter;
    Eigen::VectorXd dir = inv_hessian * grad;
    double slope = grad.dot(dir);
    if (!(slope > 0.0)) {
      inv_hessian.setIdentity();
      dir = grad;
      slope = grad.dot(dir);
      fresh_metric = true;
    }
    // Armijo backtracking; the ratio never decreases beyond evaluation noise.
    double t = 1.0;
    Eigen::VectorXd trial;
    double trial_value = value;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial = z + t * dir;
      trial_value = log_ratio(trial);
      // log B carries ~1e-14 noise (the moments enter to the 2N-th power).
      // Below that level a flat step is accepted and the gradient decides.
      const double roundoff = 1e-13 * std::max(1.0, std::abs(value));
      const bool sufficient = trial_value >= value + 1e-4 * t * slope;
      const bool flat = t * slope < roundoff && trial_value >= value - roundoff;
      if (std::isfinite(trial_value) && (sufficient || flat)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (fresh_metric) break;  // no ascent possible at this noise level
      inv_hessian.setIdentity();
      fresh_metric = true;
      continue;
    }
    const Eigen::VectorXd new_grad = central_gradient(log_ratio, trial, options.fd_step);
    const Eigen::VectorXd s = trial - z;
    const Eigen::VectorXd y = grad - new_grad;  // gradient change of -log B
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (fresh_metric) inv_hessian *= sy / y.dot(y);
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      inv_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
      fresh_metric = false;
    }
    // Back onto the gauge; the gradient of a degree-0 function scales inversely.
    const double c = gauge_value / coords.gauge_entry(trial);
    if (!(c > 0.0) || !std::isfinite(c)) fail("variational ascent lost the gauge");
    z = c * trial;
    value = trial_value;
    grad = new_grad / c;
    inv_hessian *= c * c;
    gnorm = value_gradient_norm(value, grad);
    out.ratio_history.push_back(std::exp(value));
  }
  if (gnorm >= options.gradient_tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "variational ascent stalled after %d iterations (gradient %.3g, ratio %.12g)", iter,
                  gnorm, std::exp(value));
    fail(buf);
  }
  fill(out);
  return out;
}

double euler_lagrange_residual(const FreeFunction& f, const StateSpec& spec, const QuadratureRule& rule) {
  spec.validate();
  const RatioProblem problem(spec, rule);
  FreeFunction gauged = f;
  check_nodes(gauged, problem.nodes());
  gauged.apply_gauge();
  const std::vector<double>& v = gauged.node_values;
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));

  std::vector<double> probe = v;
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double h = 1e-6 * std::max(std::abs(v[i]), scale);
    probe[i] = v[i] + h;
    const double up = problem.ratio(probe, probe);
    probe[i] = v[i] - h;
    const double down = problem.ratio(probe, probe);
    probe[i] = v[i];
    worst = std::max(worst, std::abs(up - down) / (2.0 * h));
  }
  return worst;
}

EpsilonFit fit_optimal_family(const FreeFunction& f, const QuadratureRule& rule) {
  const PositiveNodes nodes = positive_nodes(rule);
  check_nodes(f, nodes);
  const auto& v = f.node_values;
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) norm += nodes.w[i] * v[i] * v[i];
  if (!(norm > 0.0)) throw InvalidArgument("cannot fit a function that vanishes on every node");

  // For fixed eps the best amplitude is a projection; eps itself by golden section on log eps.
  auto fit_at = [&](double eps) {
    double vp = 0.0;
    double pp = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double phi = nodes.x[i] / (1.0 + eps * nodes.x[i] * nodes.x[i]);
      vp += nodes.w[i] * v[i] * phi;
      pp += nodes.w[i] * phi * phi;
    }
    const double amp = vp / pp;
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - amp * nodes.x[i] / (1.0 + eps * nodes.x[i] * nodes.x[i]);
      err += nodes.w[i] * d * d;
    }
    return EpsilonFit{eps, amp, std::sqrt(err / norm)};
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(1e-4);
  double hi = std::log(64.0);
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = fit_at(std::exp(a)).weighted_l2_error;
  double fb = fit_at(std::exp(b)).weighted_l2_error;
  while (hi - lo > 1e-12) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = fit_at(std::exp(a)).weighted_l2_error;
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = fit_at(std::exp(b)).weighted_l2_error;
    }
  }
  return fit_at(std::exp(0.5 * (lo + hi)));
}

void write_csv(const FreeFunction& f, std::ostream& out) {
  out << "node,value\n";
  char buf[64];
  for (std::size_t i = 0; i < f.abscissae.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", f.abscissae[i], f.node_values[i]);
    out << buf;
  }
}

}  // namespace cvbell
