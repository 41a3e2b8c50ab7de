#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ivdep/config.hpp"
#include "ivdep/quadcov.hpp"
#include "ivdep/sim.hpp"

namespace ivdep {

struct McConfig {
  SimConfig sim;
  EstimatorConfig est;  // delta_n and theta are overwritten per run
  int reps = 1;
  std::vector<double> thetas{2.5};
  std::vector<Method> methods{Method::LIN, Method::AN, Method::Naive};
  bool tests = true;            // compute the covariance stack and the three tests
  unsigned threads = 0;         // 0 = hardware concurrency
  std::vector<double> alphas{0.10, 0.05, 0.01};
  std::function<void(int)> progress;  // called after each finished replication
};

enum class Estimand { Gamma, R2, Corr, CorrResid };
const char* to_string(Estimand e) noexcept;

enum class McTest { H1, H2, H3 };
const char* to_string(McTest t) noexcept;

// One replication, one theta, one method.
struct McCell {
  double est[4];
  double truth[4];
  double pval[3];  // NaN when invalid
};

struct McRecords {
  int reps = 0;
  std::vector<double> thetas;
  std::vector<Method> methods;
  // [rep][theta][method]
  std::vector<McCell> cells;
  std::vector<std::size_t> floor_hits;
  const McCell& at(int rep, std::size_t t, std::size_t m) const {
    return cells[(static_cast<std::size_t>(rep) * thetas.size() + t) * methods.size() + m];
  }
};

struct EstimandRow {
  Estimand estimand;
  Method method;
  double theta;
  double median_bias, iqr, rmse, mean_truth;
  int valid;
};

struct RejectionRow {
  McTest test;
  Method method;
  double theta;
  double alpha;
  double rate;  // over valid replications
  int valid;
  int invalid;
};

struct McSummary {
  std::vector<EstimandRow> estimands;
  std::vector<RejectionRow> rejections;

  const EstimandRow* find(Estimand e, Method m, double theta) const;
  const RejectionRow* find(McTest t, Method m, double theta, double alpha) const;
};

McRecords mc_simulate(const McConfig& cfg);
McSummary mc_summarize(const McRecords& rec, const std::vector<double>& alphas);
McSummary mc_run(const McConfig& cfg);

std::string estimand_csv(const McSummary& s);
std::string rejection_csv(const McSummary& s);

}  // namespace ivdep
