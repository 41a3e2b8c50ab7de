#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "ivdep/error.hpp"

using namespace ivdep::cli;

namespace {

void sim_keys(Options& o) {
  o.value("model", "1 or 2");
  o.value("stocks", "number of stocks (model 1 only may exceed 2)");
  o.value("days", "trading days (default 2520)");
  o.value("bars_per_day", "observations per day (78 = 5 minutes)");
  o.value("substeps", "fine Euler steps per observation");
  o.value("seed", "master seed");
  o.flag("no_jumps", "switch off price jumps");
  o.flag("fixed_vol_path", "reuse one volatility realisation in every replication");
}

void estimate_keys(Options& o) {
  o.value("method", "lin | an | naive (default lin)");
  o.value("factors", "comma-separated return-factor labels (default: trailing factor columns)");
  o.value("idiovol_factors", "factors whose variances are the IdioVol factors (default: all)");
  o.value("stocks", "comma-separated stock universe (default: all non-factor columns)");
  o.value("block_len", "block length for the return-level diagnostics (default: one day)");
  o.value("threads", "worker threads (default: all cores)");
  o.value("out", "output prefix; writes PREFIX.json and PREFIX.csv");
  o.estimator_keys();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimation and testing of dependence between idiosyncratic volatilities"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "simulate a panel from model 1 or 2");
  Options so(sim);
  sim_keys(so);
  so.value("rep", "replication index (selects the random stream)");
  so.value("out", "panel CSV to write");
  so.value("truth", "optional JSON with the latent quadratic covariations and pairwise truths");

  auto* est = app.add_subcommand("estimate", "pairwise estimates with standard errors");
  Options eo(est);
  input_keys(eo);
  estimate_keys(eo);

  auto* tst = app.add_subcommand("test", "estimate plus t/Wald tests and FDR rejection masks");
  Options to(tst);
  input_keys(to);
  estimate_keys(to);
  to.value("q", "FDR level (default 0.05)");
  to.value("fdr", "bh | by (default bh)");

  auto* rep = app.add_subcommand("report", "heatmap matrix and network edge list from 'test' output");
  Options ro(rep);
  ro.value("input", "JSON written by 'test'");
  ro.value("quantity", "corr | corr_resid | qc | resid_qc | q (default corr)");
  ro.value("test", "h1 | h3 (default: h3 for residual quantities, else h1)");
  ro.value("out", "output prefix; writes PREFIX_heatmap.csv and PREFIX_edges.csv");

  auto* mcc = app.add_subcommand("mc", "Monte Carlo study");
  Options mo(mcc);
  sim_keys(mo);
  mo.value("reps", "replications (default 100)");
  mo.value("thetas", "comma-separated theta grid (default 2.5)");
  mo.value("methods", "comma-separated methods (default lin,an,naive)");
  mo.value("alphas", "test levels (default 0.10,0.05,0.01)");
  mo.value("threads", "worker threads (default: all cores)");
  mo.flag("no_tests", "skip the asymptotic covariance and tests");
  mo.flag("progress", "print progress on stderr");
  mo.value("out", "output prefix; writes PREFIX_estimands.csv and PREFIX_rejections.csv");
  mo.estimator_keys();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      so.resolve();
      return run_simulate(so);
    }
    if (est->parsed()) {
      eo.resolve();
      return run_estimate(eo, false);
    }
    if (tst->parsed()) {
      to.resolve();
      return run_estimate(to, true);
    }
    if (rep->parsed()) {
      ro.resolve();
      return run_report(ro);
    }
    mo.resolve();
    return run_mc(mo);
  } catch (const ivdep::Error& e) {
    std::cerr << "ivdep: " << e.what() << "\n";
    switch (ivdep::category(e.code())) {
      case ivdep::ErrorCategory::Config: return kExitConfig;
      case ivdep::ErrorCategory::Data: return kExitData;
      case ivdep::ErrorCategory::Numeric: return kExitNumeric;
    }
    return kExitOther;
  } catch (const std::exception& e) {
    std::cerr << "ivdep: " << e.what() << "\n";
    return kExitOther;
  }
}
