#include "cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "cvbell/errors.hpp"
#include "cvbell/functional_bell.hpp"
#include "cvbell/mk_binning.hpp"
#include "cvbell/model.hpp"
#include "cvbell/oracle.hpp"
#include "cvbell/variational.hpp"
#include "json.hpp"

#ifndef CVBELL_VERSION
#define CVBELL_VERSION "unknown"
#endif

namespace cvbell::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

using Cell = std::variant<std::monostate, int, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, int>) s += std::to_string(v);
              else if constexpr (std::is_same_v<T, double>) s += fmt(v);
              else if constexpr (std::is_same_v<T, std::string>) s += v;
            },
            row[i]);
      }
      s += '\n';
    }
    return s;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& row : rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::monostate>) obj[columns[i]] = nullptr;
              else obj[columns[i]] = v;
            },
            row[i]);
      }
      arr.push_back(obj);
    }
    return arr;
  }
};

Cell opt_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

json metadata(const RunConfig& c) {
  json config = {{"n", c.n},         {"n_min", c.n_min}, {"n_max", c.n_max},   {"eta", c.eta},
                 {"p", c.p},         {"order", c.order}, {"format", c.format}, {"oracle", c.use_oracle},
                 {"seeds", c.seeds}, {"perturb_eps", c.perturb_eps}};
  config["r"] = c.r ? json(*c.r) : json(nullptr);
  config["ineq"] = c.inequality ? json(std::string(to_string(*c.inequality))) : json(nullptr);
  char eigen[32];
  std::snprintf(eigen, sizeof eigen, "%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  return {{"tool", "cvbell"},        {"version", CVBELL_VERSION}, {"eigen", eigen},
          {"subcommand", c.subcommand}, {"quadrature_order", c.order}, {"config", config}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw UsageError("failed writing '" + path + "'");
}

// Primary output goes to --out when given (with a metadata sidecar), else to `out`.
void emit(const RunConfig& c, const std::string& text, json meta, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  write_file(c.out_path, text);
  write_file(c.out_path + ".meta.json", meta.dump(2) + "\n");
}

std::string render(const RunConfig& c, const Table& t) {
  if (c.format == "json") return t.to_json().dump(2) + "\n";
  return t.csv();
}

json angles_json(const AngleConfig& a) { return {{"theta", a.theta()}, {"theta_prime", a.theta_prime()}}; }

// Golden section on log eps of the orthogonal closed form; used for splits
// other than the balanced one, where no fixed-point equation applies.
double best_epsilon_for_split(const StateSpec& spec, const QuadratureRule& rule) {
  auto ratio = [&](double log_eps) {
    return orthogonal_bell_value(spec, kernel_integrals(MeasurementFunction::optimal(std::exp(log_eps)), rule)).ratio;
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(1e-4), b = std::log(64.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = ratio(x1), f2 = ratio(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = ratio(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = ratio(x1);
    }
  }
  return std::exp(0.5 * (a + b));
}

double optimal_epsilon(const StateSpec& spec, const QuadratureRule& rule) {
  const int n = spec.n_modes;
  if (n >= 2 && spec.r_split == n / 2) {
    return n % 2 == 0 ? solve_epsilon_even(spec.efficiency, rule).optimum()
                      : solve_epsilon_odd(n, spec.efficiency, rule).optimum();
  }
  return best_epsilon_for_split(spec, rule);
}

}  // namespace

int cmd_eval(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.n < 2) throw InvalidArgument("eval needs --n >= 2");
  const Inequality ineq = c.inequality.value_or(Inequality::functional);
  const StateSpec spec{c.n, c.split(), c.p, c.eta};
  spec.validate();
  const QuadratureRule rule = gauss_hermite_rule(c.order);

  BellResult res;
  json extra = json::object();
  const std::string method = c.use_oracle ? "oracle" : "closed_form";
  switch (ineq) {
    case Inequality::functional: {
      if (!c.use_oracle && spec.r_split == c.n / 2) {
        res = bell_value(spec, rule);
      } else {
        const double eps = optimal_epsilon(spec, rule);
        const MeasurementFunction f = MeasurementFunction::optimal(eps);
        if (c.use_oracle) {
          res = evaluate(density_matrix(spec), f, f, orthogonal_angles(c.n, spec.r_split), rule);
        } else {
          res = orthogonal_bell_value(spec, kernel_integrals(f, rule));
          res.inequality_id = "functional";
          res.function_id = f.id();
        }
      }
      break;
    }
    case Inequality::cfrd: {
      if (c.use_oracle) {
        const MeasurementFunction f = MeasurementFunction::identity();
        res = evaluate(density_matrix(spec), f, f, orthogonal_angles(c.n, spec.r_split), rule);
        res.inequality_id = "cfrd";
      } else {
        res = cfrd_bell_value(spec, rule);
      }
      break;
    }
    case Inequality::mk: {
      const AngleConfig angles = mk_optimal_angles(c.n, spec.r_split);
      double s = 0.0;
      if (c.use_oracle) {
        const MKResult m = mk_evaluate(density_matrix(spec), angles);
        s = m.bell_ratio;
        extra["variant"] = std::string(to_string(m.variant));
        extra["exchanged"] = m.exchanged;
      } else {
        s = mk_bell_value(spec);
      }
      res = BellResult{s, 1.0, s, "mk", MeasurementFunction::sign_bin().id(), angles};
      break;
    }
  }

  if (c.format == "csv") {
    Table t{{"inequality_id", "function_id", "N", "r", "eta", "p", "lhs", "rhs", "ratio", "method"}, {}};
    t.rows.push_back({res.inequality_id, res.function_id, c.n, spec.r_split, c.eta, c.p, res.lhs, res.rhs, res.ratio,
                      method});
    const std::string text = t.csv();
    out << text;
    if (!c.out_path.empty()) emit(c, text, metadata(c), out);
    return 0;
  }
  json j = {{"inequality_id", res.inequality_id},
            {"function_id", res.function_id},
            {"lhs", res.lhs},
            {"rhs", res.rhs},
            {"ratio", res.ratio},
            {"violation", res.ratio > 1.0},
            {"angles", angles_json(res.angles)},
            {"spec", {{"n", c.n}, {"r", spec.r_split}, {"eta", c.eta}, {"p", c.p}}},
            {"method", method},
            {"quadrature_order", c.order}};
  j.update(extra);
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!c.out_path.empty()) emit(c, text, metadata(c), out);
  return 0;
}

int cmd_figure1(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.n_min < 2 || c.n_max < c.n_min) throw InvalidArgument("figure1 needs 2 <= --n-min <= --n-max");
  const QuadratureRule rule = gauss_hermite_rule(c.order);
  Table t{{"N", "B_optimal", "B_cfrd"}, {}};
  for (int n = c.n_min; n <= c.n_max; ++n) {
    const StateSpec spec{n, n / 2, c.p, c.eta};
    const double b_opt = bell_value(spec, rule).ratio;
    const double b_cfrd = cfrd_bell_value(spec, rule).ratio;
    if (b_opt < b_cfrd * (1.0 - 1e-12)) {
      throw InternalError("optimal function below CFRD at N=" + std::to_string(n) + ": " + fmt(b_opt) + " < " +
                          fmt(b_cfrd));
    }
    t.rows.push_back({n, b_opt, b_cfrd});
  }
  emit(c, render(c, t), metadata(c), out);
  return 0;
}

int cmd_figure2(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.n_min < 2 || c.n_max < c.n_min) throw InvalidArgument("figure2 needs 2 <= --n-min <= --n-max");
  const QuadratureRule rule = gauss_hermite_rule(c.order);
  std::vector<Inequality> which = {Inequality::functional, Inequality::cfrd, Inequality::mk};
  if (c.inequality) which = {*c.inequality};
  Table t{{"N", "inequality_id", "eta_crit", "eta_flag", "p_crit", "p_flag"}, {}};
  for (Inequality ineq : which) {
    for (int n = c.n_min; n <= c.n_max; ++n) {
      const auto eta_crit = critical_efficiency(n, c.p, ineq, rule);
      const auto p_crit = critical_purity(n, c.eta, ineq, rule);
      t.rows.push_back({n, std::string(to_string(ineq)), opt_cell(eta_crit), eta_crit ? 1 : 0, opt_cell(p_crit),
                        p_crit ? 1 : 0});
    }
  }
  emit(c, render(c, t), metadata(c), out);
  return 0;
}

int cmd_asymptotic(const RunConfig& c, std::ostream& out, std::ostream&) {
  const Inequality ineq = c.inequality.value_or(Inequality::functional);
  const QuadratureRule rule = gauss_hermite_rule(c.order);
  const AsymptoticEstimate est = asymptotic_product(ineq, c.n_max, rule);
  json j = {{"inequality_id", std::string(to_string(ineq))},
            {"product", ineq == Inequality::mk ? "eta*p^2" : "eta*p"},
            {"extrapolated", est.extrapolated},
            {"tail_n", est.tail_n},
            {"tail_value", est.tail_value},
            {"n_values", est.n_values},
            {"values", est.values},
            {"quadrature_order", c.order}};
  const std::string text = j.dump(2) + "\n";
  emit(c, text, metadata(c), out);
  return 0;
}

int cmd_oracle_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.n_min < 3 || c.n_max > 8 || c.n_max < c.n_min) throw InvalidArgument("oracle-check needs 3 <= N <= 8");
  const QuadratureRule rule = gauss_hermite_rule(c.order);
  constexpr double kTolerance = 1e-6;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };

  Table t{{"N", "eta", "p", "functional_dev", "cfrd_dev", "mk_dev", "mk_r_spread"}, {}};
  double worst = 0.0;
  std::string worst_cell;
  for (int n = c.n_min; n <= c.n_max; ++n) {
    for (double eta : {1.0, 0.9, 0.8}) {
      for (double p : {1.0, 0.9}) {
        const StateSpec spec{n, n / 2, p, eta};
        const DensityMatrix rho = density_matrix(spec);
        const AngleConfig ortho = orthogonal_angles(n, n / 2);

        const double eps = optimal_epsilon(spec, rule) * (1.0 + c.perturb_eps);
        const MeasurementFunction f = MeasurementFunction::optimal(eps);
        const double d_fun = rel(bell_value(spec, rule).ratio, evaluate(rho, f, f, ortho, rule).ratio);

        const MeasurementFunction id = MeasurementFunction::identity();
        const double d_cfrd = rel(cfrd_bell_value(spec, rule).ratio, evaluate(rho, id, id, ortho, rule).ratio);

        const double d_mk = rel(mk_bell_value(spec), mk_evaluate(rho, mk_optimal_angles(n, n / 2)).bell_ratio);

        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int r = 1; r <= n; ++r) {
          const StateSpec sr{n, r, p, eta};
          const double b = mk_evaluate(density_matrix(sr), mk_optimal_angles(n, r)).bell_ratio;
          lo = std::min(lo, b);
          hi = std::max(hi, b);
        }
        const double spread = (hi - lo) / hi;

        t.rows.push_back({n, eta, p, d_fun, d_cfrd, d_mk, spread});
        const double cell = std::max({d_fun, d_cfrd, d_mk, spread});
        if (cell > worst) {
          worst = cell;
          worst_cell = "N=" + std::to_string(n) + " eta=" + fmt(eta) + " p=" + fmt(p);
        }
      }
    }
  }
  emit(c, render(c, t), metadata(c), out);
  if (worst > kTolerance) {
    err << "oracle-check: deviation " << fmt(worst) << " exceeds " << fmt(kTolerance) << " at " << worst_cell << "\n";
    return 1;
  }
  err << "oracle-check: max deviation " << fmt(worst) << " over " << t.rows.size() << " cells\n";
  return 0;
}

int cmd_optimize(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.seeds < 1 || c.seeds > 3) throw InvalidArgument("--seeds must be 1, 2 or 3");
  const StateSpec spec{c.n, c.split(), c.p, c.eta};
  spec.validate();
  if (c.n > 10) throw InvalidArgument("optimize is limited to N <= 10");
  const QuadratureRule rule = gauss_hermite_rule(c.order);

  const std::vector<std::pair<std::string, MeasurementFunction>> inits = {
      {"identity", MeasurementFunction::identity()},
      {"sign_bin", MeasurementFunction::sign_bin()},
      {"optimal(eps=1)", MeasurementFunction::optimal(1.0)}};

  json seeds = json::array();
  std::optional<VariationalResult> best;
  bool all_converged = true;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int s = 0; s < c.seeds; ++s) {
    VariationalResult partial;
    VariationalOptions options;
    options.best_so_far = &partial;
    VariationalResult res;
    bool converged = true;
    try {
      res = optimize_function(spec, rule, FreeFunction::from(inits[s].second, rule), options);
    } catch (const ConvergenceError& e) {
      err << "optimize: seed " << inits[s].first << ": " << e.what() << "\n";
      res = partial;
      converged = false;
      all_converged = false;
    }
    seeds.push_back({{"init", inits[s].first},
                     {"ratio", res.result.ratio},
                     {"iterations", res.iterations},
                     {"gradient_norm", res.gradient_norm},
                     {"converged", converged}});
    lo = std::min(lo, res.result.ratio);
    hi = std::max(hi, res.result.ratio);
    if (!best || res.result.ratio > best->result.ratio) best = res;
  }

  const EpsilonFit fit = fit_optimal_family(best->f, rule);
  json summary = {{"spec", {{"n", c.n}, {"r", spec.r_split}, {"eta", c.eta}, {"p", c.p}}},
                  {"ratio", best->result.ratio},
                  {"fit",
                   {{"epsilon", fit.epsilon},
                    {"amplitude", fit.amplitude},
                    {"weighted_l2_error", fit.weighted_l2_error}}},
                  {"seeds", seeds},
                  {"ratio_spread", (hi - lo) / hi},
                  {"converged", all_converged},
                  {"quadrature_order", c.order}};
  if (c.n >= 2 && spec.r_split == c.n / 2) {
    const double ref = optimal_epsilon(spec, rule);
    summary["reference_epsilon"] = ref;
    summary["epsilon_deviation"] = std::abs(fit.epsilon - ref);
  }

  if (c.out_path.empty()) {
    summary["nodes"] = best->f.abscissae;
    summary["values"] = best->f.node_values;
  } else {
    std::ostringstream csv;
    write_csv(best->f, csv);
    json meta = metadata(c);
    meta["summary"] = summary;
    emit(c, csv.str(), meta, out);
  }
  out << summary.dump(2) << "\n";
  return all_converged ? 0 : 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continuous-variable Bell inequality calculator"};
  app.require_subcommand(1);
  RunConfig c;
  std::string ineq;
  std::optional<int> r;

  auto common = [&](CLI::App* sub, bool with_spec) {
    sub->add_option("--order", c.order, "Gauss-Hermite quadrature order")->capture_default_str();
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("--out", c.out_path, "Output file (a .meta.json sidecar is written next to it)");
    if (with_spec) {
      sub->add_option("--eta", c.eta, "Detection efficiency")->capture_default_str();
      sub->add_option("--p", c.p, "Purity")->capture_default_str();
    }
  };
  auto ineq_option = [&](CLI::App* sub) {
    sub->add_option("--ineq", ineq, "functional, cfrd or mk")->check(CLI::IsMember({"functional", "cfrd", "mk"}));
  };

  CLI::App* eval = app.add_subcommand("eval", "Bell ratio for a single state");
  common(eval, true);
  ineq_option(eval);
  eval->add_option("--n", c.n, "Number of modes")->capture_default_str();
  eval->add_option("--r", r, "Split: modes r..N-1 occupied in one branch (default N/2)");
  eval->add_flag("--oracle", c.use_oracle, "Evaluate on the Fock-space density matrix");

  CLI::App* fig1 = app.add_subcommand("figure1", "B_N of the optimal function and of CFRD versus N");
  common(fig1, true);
  fig1->add_option("--n-min", c.n_min)->capture_default_str();
  fig1->add_option("--n-max", c.n_max)->capture_default_str();

  CLI::App* fig2 = app.add_subcommand("figure2", "Critical efficiency and purity versus N");
  common(fig2, true);
  ineq_option(fig2);
  fig2->add_option("--n-min", c.n_min)->capture_default_str();
  fig2->add_option("--n-max", c.n_max)->capture_default_str();

  CLI::App* asym = app.add_subcommand("asymptotic", "Large-N limit of the critical decoherence product (JSON)");
  common(asym, false);
  ineq_option(asym);
  int asym_n_max = 60;
  asym->add_option("--n-max", asym_n_max)->capture_default_str();

  CLI::App* check = app.add_subcommand("oracle-check", "Closed forms against the Fock-space oracle");
  common(check, false);
  int check_n_min = 3, check_n_max = 8;
  check->add_option("--n-min", check_n_min)->capture_default_str();
  check->add_option("--n-max", check_n_max)->capture_default_str();
  check->add_option("--perturb-eps", c.perturb_eps, "Relative error injected into the oracle's epsilon (testing)");

  CLI::App* opt = app.add_subcommand("optimize", "Variational optimization of the measurement function");
  common(opt, true);
  opt->add_option("--n", c.n, "Number of modes")->capture_default_str();
  opt->add_option("--r", r, "Split (default N/2)");
  opt->add_option("--seeds", c.seeds, "Number of initial functions (1-3)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }

  c.r = r;
  if (!ineq.empty()) c.inequality = parse_inequality(ineq);
  CLI::App* chosen = app.get_subcommands().front();
  c.subcommand = chosen->get_name();
  try {
    if (chosen == eval) return cmd_eval(c, out, err);
    if (chosen == fig1) return cmd_figure1(c, out, err);
    if (chosen == fig2) return cmd_figure2(c, out, err);
    if (chosen == asym) {
      c.n_max = asym_n_max;
      return cmd_asymptotic(c, out, err);
    }
    if (chosen == check) {
      c.n_min = check_n_min;
      c.n_max = check_n_max;
      return cmd_oracle_check(c, out, err);
    }
    if (chosen == opt) return cmd_optimize(c, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cvbell::cli
