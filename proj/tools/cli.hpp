#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "cvbell/critical.hpp"

namespace cvbell::cli {

struct RunConfig {
  std::string subcommand;
  std::optional<Inequality> inequality;
  int n = 6;
  std::optional<int> r;
  int n_min = 4;
  int n_max = 20;
  double eta = 1.0;
  double p = 1.0;
  int order = kDefaultQuadratureOrder;
  std::string format = "csv";
  std::string out_path;
  double perturb_eps = 0.0;
  bool use_oracle = false;
  int seeds = 3;

  int split() const { return r.value_or(n / 2); }
};

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_figure1(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_figure2(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_asymptotic(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Returns 0 on success, 1 on a computation
/// failure and 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cvbell::cli
