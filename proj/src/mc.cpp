#include "ivdep/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "ivdep/error.hpp"
#include "ivdep/factors.hpp"
#include "ivdep/parallel.hpp"
#include "ivdep/spot.hpp"

namespace ivdep {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double w = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[hi] * w;
}

}  // namespace

const char* to_string(Estimand e) noexcept {
  switch (e) {
    case Estimand::Gamma: return "gamma_Z1";
    case Estimand::R2: return "R2_Z1";
    case Estimand::Corr: return "corr_Z1_Z2";
    case Estimand::CorrResid: return "corr_resid_Z1_Z2";
  }
  return "?";
}

const char* to_string(McTest t) noexcept {
  switch (t) {
    case McTest::H1: return "H1_Z1_Z2";
    case McTest::H2: return "H2_Z1_X";
    case McTest::H3: return "H3_resid";
  }
  return "?";
}

McRecords mc_simulate(const McConfig& cfg) {
  if (cfg.reps < 1) throw Error(ErrorCode::ConfigError, "replication count must be at least 1");
  if (cfg.sim.n_stocks < 2) throw Error(ErrorCode::ConfigError, "Monte Carlo needs two stocks");
  cfg.sim.validate();
  McRecords rec;
  rec.reps = cfg.reps;
  rec.thetas = cfg.thetas;
  rec.methods = cfg.methods;
  const std::size_t per_rep = cfg.thetas.size() * cfg.methods.size();
  rec.cells.resize(static_cast<std::size_t>(cfg.reps) * per_rep);
  rec.floor_hits.assign(cfg.reps, 0);
  const bool any_bc = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) { return m != Method::Naive; });
  std::mutex progress_mu;
  int done = 0;

  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads ? cfg.threads : default_threads(), [&](std::size_t rep) {
    SimResult sim = simulate_model(cfg.sim, rep);
    rec.floor_hits[rep] = sim.latent.floor_hits;
    LatentTruth tr = latent_truth(latent_quadcov(sim.latent), 0, 1);
    const double truth[4] = {tr.gamma_j, tr.r2_j, tr.corr, tr.corr_resid};
    const int d = static_cast<int>(sim.panel.d());
    const int X = d - 1;
    std::vector<Functional> pi{Functional::entry(d, X, X)};
    IdioVolModelSpec sj(d, 0, {X}, pi), ss(d, 1, {X}, pi);
    PairStack st = PairStack::build(sj, ss);
    for (std::size_t ti = 0; ti < cfg.thetas.size(); ++ti) {
      EstimatorConfig est = cfg.est;
      est.delta_n = sim.panel.delta_n;
      est.theta = cfg.thetas[ti];
      McCell* cells = &rec.cells[(rep * cfg.thetas.size() + ti) * cfg.methods.size()];
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        auto& c = cells[mi];
        for (int e = 0; e < 4; ++e) {
          c.est[e] = kNaN;
          c.truth[e] = truth[e];
        }
        for (int t = 0; t < 3; ++t) c.pval[t] = kNaN;
      }
      try {
        est.validate_for(sim.panel.n());
        SpotCovPath path = estimate_spot_path(sim.panel, est);
        auto mask = estimation_mask(path, est);
        EstimationContext ctx(path, mask ? &*mask : nullptr, est.fingerprint());
        AvarMatrix a;
        bool have_sigma = false;
        if (cfg.tests && any_bc) {
          a = ctx.avar(st.pairs);
          have_sigma = true;
        }
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
          Eigen::VectorXd v = estimate_stack(ctx, st, cfg.methods[mi]);
          PairAnalysis pa = derive_pair(st, v, have_sigma ? &a : nullptr, est.delta_n, cfg.methods[mi]);
          auto& c = cells[mi];
          c.est[0] = pa.gamma_j.size() ? pa.gamma_j(0) : kNaN;
          c.est[1] = pa.r2_j.value;
          c.est[2] = pa.corr.value;
          c.est[3] = pa.corr_resid.value;
          if (have_sigma) {
            c.pval[0] = pa.h1.valid ? pa.h1.p_value : kNaN;
            c.pval[1] = pa.h2_j.valid ? pa.h2_j.p_value : kNaN;
            c.pval[2] = pa.h3.valid ? pa.h3.p_value : kNaN;
          }
        }
      } catch (const Error&) {
        // left as NaN; counted as invalid in the summary
      }
    }
    if (cfg.progress) {
      std::lock_guard<std::mutex> lk(progress_mu);
      cfg.progress(++done);
    }
  });
  return rec;
}

McSummary mc_summarize(const McRecords& rec, const std::vector<double>& alphas) {
  McSummary s;
  for (std::size_t ti = 0; ti < rec.thetas.size(); ++ti) {
    for (std::size_t mi = 0; mi < rec.methods.size(); ++mi) {
      for (int e = 0; e < 4; ++e) {
        std::vector<double> err, est;
        double sq = 0.0, tsum = 0.0;
        for (int r = 0; r < rec.reps; ++r) {
          const McCell& c = rec.at(r, ti, mi);
          if (!std::isfinite(c.est[e]) || !std::isfinite(c.truth[e])) continue;
          err.push_back(c.est[e] - c.truth[e]);
          est.push_back(c.est[e]);
          sq += err.back() * err.back();
          tsum += c.truth[e];
        }
        EstimandRow row{static_cast<Estimand>(e), rec.methods[mi], rec.thetas[ti], kNaN, kNaN, kNaN, kNaN,
                        static_cast<int>(err.size())};
        if (!err.empty()) {
          row.median_bias = quantile(err, 0.5);
          row.iqr = quantile(est, 0.75) - quantile(est, 0.25);
          row.rmse = std::sqrt(sq / static_cast<double>(err.size()));
          row.mean_truth = tsum / static_cast<double>(err.size());
        }
        s.estimands.push_back(row);
      }
      for (int t = 0; t < 3; ++t) {
        for (double alpha : alphas) {
          int valid = 0, rej = 0;
          for (int r = 0; r < rec.reps; ++r) {
            double p = rec.at(r, ti, mi).pval[t];
            if (!std::isfinite(p)) continue;
            ++valid;
            rej += p < alpha;
          }
          s.rejections.push_back({static_cast<McTest>(t), rec.methods[mi], rec.thetas[ti], alpha,
                                  valid ? static_cast<double>(rej) / valid : kNaN, valid, rec.reps - valid});
        }
      }
    }
  }
  return s;
}

McSummary mc_run(const McConfig& cfg) { return mc_summarize(mc_simulate(cfg), cfg.alphas); }

const EstimandRow* McSummary::find(Estimand e, Method m, double theta) const {
  for (const auto& r : estimands)
    if (r.estimand == e && r.method == m && r.theta == theta) return &r;
  return nullptr;
}

const RejectionRow* McSummary::find(McTest t, Method m, double theta, double alpha) const {
  for (const auto& r : rejections)
    if (r.test == t && r.method == m && r.theta == theta && r.alpha == alpha) return &r;
  return nullptr;
}

std::string estimand_csv(const McSummary& s) {
  std::ostringstream os;
  os << "estimand,method,theta,median_bias,iqr,rmse,mean_truth,valid\n";
  for (const auto& r : s.estimands)
    os << to_string(r.estimand) << ',' << to_string(r.method) << ',' << format_double(r.theta) << ','
       << format_double(r.median_bias) << ',' << format_double(r.iqr) << ',' << format_double(r.rmse) << ','
       << format_double(r.mean_truth) << ',' << r.valid << '\n';
  return os.str();
}

std::string rejection_csv(const McSummary& s) {
  std::ostringstream os;
  os << "test,method,theta,alpha,rejection_rate,valid,invalid\n";
  for (const auto& r : s.rejections)
    os << to_string(r.test) << ',' << to_string(r.method) << ',' << format_double(r.theta) << ','
       << format_double(r.alpha) << ',' << format_double(r.rate) << ',' << r.valid << ',' << r.invalid << '\n';
  return os.str();
}

}  // namespace ivdep
