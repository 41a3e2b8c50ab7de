#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "ivdep/error.hpp"
#include "ivdep/factors.hpp"
#include "ivdep/inference.hpp"
#include "ivdep/io.hpp"
#include "ivdep/mc.hpp"
#include "ivdep/parallel.hpp"
#include "ivdep/sim.hpp"
#include "ivdep/spot.hpp"

namespace ivdep::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kEstimatorKeys[][2] = {
    {"delta_n", "observation interval in years (default: from the panel)"},
    {"theta", "window tuning constant, k_n = ceil(theta / sqrt(delta_n))"},
    {"varpi", "price truncation exponent"},
    {"trunc_mult", "price truncation multiplier on daily bipower volatility"},
    {"varpi_prime", "exponent of the asymptotic volatility-jump threshold"},
    {"vol_jump_abs", "volatility-jump threshold for the absolute rules"},
    {"vol_jump_rule", "volatility_points | diagonal_variance | frobenius | asymptotic"},
    {"r_jump_activity", "jump activity index r"},
    {"vol_trunc_enabled", "drop windows flagged as volatility jumps (true/false)"},
    {"price_trunc_enabled", "truncate large price increments (true/false)"},
    {"allow_cross_day_windows", "let spot windows straddle day boundaries (true/false)"},
};

std::string dashed(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const Derived& d) { return {{"value", num(d.value)}, {"se", num(d.se)}, {"valid", d.valid}}; }

json to_json(const TestResult& t) {
  json j = {{"statistic", num(t.statistic)}, {"p_value", t.valid ? num(t.p_value) : json(nullptr)}, {"valid", t.valid}};
  if (t.dof) j["dof"] = t.dof;
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

double p_of(const json& t) { return t.contains("p_value") && t["p_value"].is_number() ? t["p_value"].get<double>() : kNaN; }

int column_of(const ReturnPanel& p, const std::string& label) {
  for (std::size_t i = 0; i < p.labels.size(); ++i)
    if (p.labels[i] == label) return static_cast<int>(i);
  throw Error(ErrorCode::ConfigError, "no column labelled '" + label + "'");
}

std::string pair_key(const std::string& a, const std::string& b) { return a + "|" + b; }

ReturnPanel load_panel(const Options& o) {
  if (o.has("panel")) {
    if (o.has("ticks")) throw Error(ErrorCode::ConfigError, "give either panel or ticks, not both");
    return read_panel_csv(o.str("panel"));
  }
  if (!o.has("ticks")) throw Error(ErrorCode::ConfigError, "an input panel or tick files are required");
  auto files = o.list("ticks");
  auto labels = o.has("labels") ? o.list("labels") : std::vector<std::string>{};
  if (labels.empty())
    for (std::size_t i = 0; i < files.size(); ++i) labels.push_back("A" + std::to_string(i + 1));
  Session ses;
  ses.open_seconds = static_cast<int>(o.integer("session_open", ses.open_seconds));
  ses.close_seconds = static_cast<int>(o.integer("session_close", ses.close_seconds));
  ses.utc_offset_minutes = static_cast<int>(o.integer("utc_offset_minutes", 0));
  return load_and_resample(files, labels, static_cast<int>(o.integer("grid_step", 300)), ses,
                           static_cast<int>(o.integer("factor_count", 1)));
}


}  // namespace

// ---------------------------------------------------------------- Options

Options::Options(CLI::App* app) : app_(app) {
  app_->add_option("--config", config_path_, "key=value file; its keys override flags (with a warning)");
}

void Options::value(const std::string& key, const std::string& help) {
  opts_[key] = app_->add_option("--" + dashed(key), values_[key], help);
}

void Options::flag(const std::string& key, const std::string& help) {
  opts_[key] = app_->add_flag("--" + dashed(key), flags_[key], help);
}

void Options::estimator_keys() {
  for (const auto& kv : kEstimatorKeys) value(kv[0], kv[1]);
}

void Options::resolve() {
  for (const auto& [key, opt] : opts_) {
    if (opt->count() == 0) continue;
    merged_[key] = flags_.count(key) ? std::string(flags_.at(key) ? "true" : "false") : values_.at(key);
  }
  if (config_path_.empty()) return;
  for (const auto& [key, val] : parse_kv(read_file(config_path_))) {
    if (!opts_.count(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + config_path_);
    auto it = merged_.find(key);
    if (it != merged_.end() && it->second != val)
      std::cerr << "ivdep: warning: " << config_path_ << " sets " << key << "=" << val << ", overriding --"
                << dashed(key) << " " << it->second << "\n";
    merged_[key] = val;
  }
}

std::string Options::str(const std::string& key, const std::string& def) const {
  auto it = merged_.find(key);
  return it == merged_.end() ? def : it->second;
}

std::string Options::required(const std::string& key) const {
  if (!has(key)) throw Error(ErrorCode::ConfigError, "--" + dashed(key) + " is required");
  return str(key);
}

double Options::num(const std::string& key, double def) const {
  if (!has(key)) return def;
  try {
    return parse_double(str(key));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, key + ": " + e.what());
  }
}

long long Options::integer(const std::string& key, long long def) const {
  double x = num(key, static_cast<double>(def));
  if (x != std::floor(x)) throw Error(ErrorCode::ConfigError, key + " must be an integer");
  return static_cast<long long>(x);
}

bool Options::boolean(const std::string& key, bool def) const {
  if (!has(key)) return def;
  std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::ConfigError, key + ": expected true or false");
}

std::vector<std::string> Options::list(const std::string& key) const { return split_list(str(key)); }

EstimatorConfig Options::estimator(EstimatorConfig base) const {
  for (const auto& kv : kEstimatorKeys)
    if (has(kv[0])) apply_config_key(base, kv[0], str(kv[0]));
  return base;
}

void input_keys(Options& o) {
  o.value("panel", "panel CSV written by 'simulate' or a previous run");
  o.value("ticks", "comma-separated per-asset tick CSVs (timestamp,price)");
  o.value("labels", "comma-separated labels for the tick files");
  o.value("grid_step", "sampling step in seconds for tick input (default 300)");
  o.value("factor_count", "trailing tick files that are return factors (default 1)");
  o.value("session_open", "session open, seconds after midnight (default 34200)");
  o.value("session_close", "session close, seconds after midnight (default 57600)");
  o.value("utc_offset_minutes", "exchange time minus UTC, for stamps with an offset");
}

// ---------------------------------------------------------------- simulate

namespace {

SimConfig sim_config(const Options& o) {
  SimConfig s;
  s.model_id = static_cast<int>(o.integer("model", 2));
  s.n_stocks = static_cast<int>(o.integer("stocks", 2));
  s.days = static_cast<int>(o.integer("days", s.days));
  s.bars_per_day = static_cast<int>(o.integer("bars_per_day", s.bars_per_day));
  s.substeps = static_cast<int>(o.integer("substeps", s.substeps));
  s.seed = static_cast<std::uint64_t>(o.integer("seed", 1));
  s.jumps = !o.boolean("no_jumps");
  s.fixed_vol_path = o.boolean("fixed_vol_path");
  s.validate();
  return s;
}

}  // namespace

int run_simulate(const Options& o) {
  SimConfig s = sim_config(o);
  std::string out = o.required("out");
  SimResult r = simulate_model(s, static_cast<std::uint64_t>(o.integer("rep", 0)));
  write_panel_csv(out, r.panel);
  if (o.has("truth")) {
    Eigen::MatrixXd qc = latent_quadcov(r.latent);
    json t;
    t["model"] = s.model_id;
    t["seed"] = s.seed;
    t["delta_n"] = r.panel.delta_n;
    t["floor_hits"] = r.latent.floor_hits;
    std::vector<std::string> names{"C_X"};
    for (int j = 0; j < s.n_stocks; ++j) names.push_back("C_Z" + std::to_string(j + 1));
    t["quadcov_labels"] = names;
    json m = json::array();
    for (Eigen::Index a = 0; a < qc.rows(); ++a) {
      json row = json::array();
      for (Eigen::Index b = 0; b < qc.cols(); ++b) row.push_back(qc(a, b));
      m.push_back(row);
    }
    t["quadcov"] = m;
    json pairs;
    for (int j = 0; j < s.n_stocks; ++j)
      for (int k = j + 1; k < s.n_stocks; ++k) {
        LatentTruth lt = latent_truth(qc, j, k);
        pairs[pair_key(r.panel.labels[j], r.panel.labels[k])] = {
            {"gamma_j", num(lt.gamma_j)}, {"r2_j", num(lt.r2_j)},         {"corr", num(lt.corr)},
            {"corr_resid", num(lt.corr_resid)}, {"qc", num(lt.qc_js)}, {"resid_qc", num(lt.resid_js)},
            {"corr_idio_returns", num(latent_corr_idio_returns(r.latent, j, k))}};
      }
    t["pairs"] = pairs;
    write_file(o.str("truth"), t.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- estimate / test

int run_estimate(const Options& o, bool with_tests) {
  ReturnPanel panel = load_panel(o);
  EstimatorConfig base;
  base.delta_n = panel.delta_n;
  EstimatorConfig cfg = o.estimator(base);
  if (o.has("delta_n") && cfg.delta_n != panel.delta_n)
    std::cerr << "ivdep: warning: delta_n " << format_double(cfg.delta_n) << " differs from the panel's "
              << format_double(panel.delta_n) << "\n";
  cfg.validate();
  cfg.validate_for(panel.n());
  const Method method = method_from_string(o.str("method", "lin"));
  const std::string prefix = o.required("out");

  std::vector<int> fcols;
  if (o.has("factors")) {
    for (const auto& l : o.list("factors")) fcols.push_back(column_of(panel, l));
  } else {
    for (int c = panel.stock_count(); c < static_cast<int>(panel.d()); ++c) fcols.push_back(c);
  }
  if (fcols.empty()) throw Error(ErrorCode::ConfigError, "at least one return factor is required");
  std::vector<int> pi_idx;  // positions within fcols
  if (o.has("idiovol_factors")) {
    for (const auto& l : o.list("idiovol_factors")) {
      int c = column_of(panel, l);
      auto it = std::find(fcols.begin(), fcols.end(), c);
      if (it == fcols.end()) throw Error(ErrorCode::ConfigError, "IdioVol factor '" + l + "' is not a return factor");
      pi_idx.push_back(static_cast<int>(it - fcols.begin()));
    }
  } else {
    for (std::size_t i = 0; i < fcols.size(); ++i) pi_idx.push_back(static_cast<int>(i));
  }
  std::vector<int> stocks;
  if (o.has("stocks")) {
    for (const auto& l : o.list("stocks")) stocks.push_back(column_of(panel, l));
  } else {
    for (int c = 0; c < static_cast<int>(panel.d()); ++c)
      if (std::find(fcols.begin(), fcols.end(), c) == fcols.end()) stocks.push_back(c);
  }
  if (stocks.size() < 2) throw Error(ErrorCode::ConfigError, "the universe needs at least two stocks");
  std::set<int> fs(fcols.begin(), fcols.end());
  for (int c : stocks)
    if (fs.count(c)) throw Error(ErrorCode::ConfigError, "'" + panel.labels[c] + "' is both a stock and a factor");

  int ndays = panel.day_index.back() - panel.day_index.front() + 1;
  const int block_len = static_cast<int>(o.integer("block_len", std::max<long long>(1, static_cast<long long>(panel.n()) / ndays)));
  const int nf = static_cast<int>(fcols.size());
  const int d = 2 + nf;

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < stocks.size(); ++a)
    for (std::size_t b = a + 1; b < stocks.size(); ++b) pairs.push_back({stocks[a], stocks[b]});

  std::vector<json> results(pairs.size());
  std::vector<double> r2_rfm(panel.d(), kNaN);
  const unsigned threads = static_cast<unsigned>(o.integer("threads", 0));
  const unsigned nthreads = threads ? threads : default_threads();

  parallel_for(stocks.size(), nthreads, [&](std::size_t i) {
    std::vector<int> cols{stocks[i]};
    cols.insert(cols.end(), fcols.begin(), fcols.end());
    try {
      r2_rfm[stocks[i]] = integrated_r2_rfm(panel.select(cols, nf), block_len, 0, &cfg);
    } catch (const Error&) {
    }
  });

  parallel_for(pairs.size(), nthreads, [&](std::size_t i) {
    auto [cj, cs] = pairs[i];
    json r;
    r["stock_j"] = panel.labels[cj];
    r["stock_s"] = panel.labels[cs];
    std::vector<int> cols{cj, cs};
    cols.insert(cols.end(), fcols.begin(), fcols.end());
    try {
      ReturnPanel sub = panel.select(cols, nf);
      SpotCovPath path = estimate_spot_path(sub, cfg);
      auto mask = estimation_mask(path, cfg);
      EstimationContext ctx(path, mask ? &*mask : nullptr, cfg.fingerprint());
      std::vector<int> sub_f;
      for (int k = 0; k < nf; ++k) sub_f.push_back(2 + k);
      std::vector<Functional> pi;
      for (int k : pi_idx) pi.push_back(Functional::entry(d, 2 + k, 2 + k));
      IdioVolModelSpec sj(d, 0, sub_f, pi), ss(d, 1, sub_f, pi);
      PairAnalysis pa = analyze_pair(ctx, sj, ss, method, true);
      auto gam = [&](const std::vector<Derived>& g) {
        json out;
        for (std::size_t k = 0; k < g.size(); ++k) out[panel.labels[fcols[pi_idx[k]]]] = to_json(g[k]);
        return out;
      };
      r["qc"] = to_json(pa.qc_js);
      r["resid_qc"] = to_json(pa.resid_js);
      r["corr"] = to_json(pa.corr);
      r["corr_resid"] = to_json(pa.corr_resid);
      r["r2_j"] = to_json(pa.r2_j);
      r["r2_s"] = to_json(pa.r2_s);
      r["q"] = to_json(pa.q);
      r["gamma_j"] = gam(pa.gamma_j_d);
      r["gamma_s"] = gam(pa.gamma_s_d);
      double cir = kNaN;
      try {
        cir = corr_idio_returns(sub, block_len, 0, 1, &cfg);
      } catch (const Error&) {
      }
      r["corr_idio_returns"] = num(cir);
      r["active_windows"] = mask ? mask->count_defined() - mask->count_jumps() : path.size();
      if (with_tests) r["tests"] = {{"h1", to_json(pa.h1)}, {"h2_j", to_json(pa.h2_j)}, {"h2_s", to_json(pa.h2_s)}, {"h3", to_json(pa.h3)}};
      bool valid = pa.qc_js.valid && pa.resid_js.valid && pa.corr.valid && pa.corr_resid.valid && pa.r2_j.valid &&
                   pa.r2_s.valid;
      if (with_tests) valid = valid && pa.h1.valid && pa.h2_j.valid && pa.h2_s.valid && pa.h3.valid;
      r["valid"] = valid;
    } catch (const Error& e) {
      if (category(e.code()) == ErrorCategory::Config) throw;
      r["valid"] = false;
      r["error"] = e.what();
    }
    results[i] = std::move(r);
  });

  json doc;
  doc["method"] = to_string(method);
  doc["k_n"] = cfg.k_n();
  doc["theta_eff"] = cfg.theta_eff();
  json cj;
  for (const auto& [k, v] : parse_kv(to_kv(cfg))) cj[k] = v;
  doc["config"] = cj;
  doc["config_fingerprint"] = cfg.fingerprint();
  std::vector<std::string> slabels, flabels, plabels;
  for (int c : stocks) slabels.push_back(panel.labels[c]);
  for (int c : fcols) flabels.push_back(panel.labels[c]);
  for (int k : pi_idx) plabels.push_back(panel.labels[fcols[k]]);
  doc["stocks"] = slabels;
  doc["factors"] = flabels;
  doc["idiovol_factors"] = plabels;
  doc["block_len"] = block_len;
  json sj;
  for (int c : stocks) sj[panel.labels[c]] = {{"r2_rfm", num(r2_rfm[c])}};
  doc["stock_results"] = sj;

  bool flagged = false;
  for (const auto& r : results) flagged = flagged || !r["valid"].get<bool>();

  if (with_tests) {
    const double q = o.num("q", 0.05);
    std::string proc_s = o.str("fdr", "bh");
    FdrProcedure proc;
    if (proc_s == "bh") proc = FdrProcedure::BH;
    else if (proc_s == "by") proc = FdrProcedure::BY;
    else throw Error(ErrorCode::ConfigError, "fdr must be bh or by");
    json fdr = {{"procedure", proc_s}, {"q", q}};
    for (const char* t : {"h1", "h3"}) {
      std::vector<double> p;
      for (const auto& r : results) p.push_back(r.contains("tests") ? p_of(r["tests"][t]) : kNaN);
      FdrResult f = fdr_bh(p, q, proc);
      int nrej = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        results[i]["reject_" + std::string(t)] = static_cast<bool>(f.reject[i]);
        nrej += f.reject[i];
      }
      fdr[t] = {{"threshold", f.threshold}, {"rejections", nrej}, {"excluded", f.excluded.size()}};
    }
    // H2 is a per-stock hypothesis; take each stock's first pair
    std::vector<double> p2;
    std::vector<std::string> who;
    std::set<std::string> seen;
    for (const auto& r : results) {
      for (const char* side : {"j", "s"}) {
        std::string lab = r[std::string("stock_") + side];
        if (seen.count(lab)) continue;
        seen.insert(lab);
        who.push_back(lab);
        p2.push_back(r.contains("tests") ? p_of(r["tests"][std::string("h2_") + side]) : kNaN);
      }
    }
    FdrResult f2 = fdr_bh(p2, q, proc);
    int nrej = 0;
    for (std::size_t i = 0; i < who.size(); ++i) {
      doc["stock_results"][who[i]]["h2_p_value"] = num(p2[i]);
      doc["stock_results"][who[i]]["reject_h2"] = static_cast<bool>(f2.reject[i]);
      nrej += f2.reject[i];
    }
    fdr["h2"] = {{"threshold", f2.threshold}, {"rejections", nrej}, {"excluded", f2.excluded.size()}};
    doc["fdr"] = fdr;
  }

  json pj;
  for (auto& r : results) pj[pair_key(r["stock_j"], r["stock_s"])] = r;
  doc["pairs"] = pj;
  write_file(prefix + ".json", doc.dump(2) + "\n");

  // flat table, one row per pair
  auto cell = [](const json& v) -> std::string {
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    return "";
  };
  std::string csv = "stock_j,stock_s";
  const char* qs[] = {"qc", "resid_qc", "corr", "corr_resid", "r2_j", "r2_s", "q"};
  for (const char* k : qs) csv += std::string(",") + k + "," + k + "_se";
  csv += ",corr_idio_returns";
  for (const auto& l : plabels) csv += ",gamma_j_" + l + ",gamma_s_" + l;
  if (with_tests) csv += ",p_h1,p_h2_j,p_h2_s,p_h3,reject_h1,reject_h3";
  csv += ",valid\n";
  auto at = [](const json& r, const std::string& a, const std::string& b) -> json {
    if (!r.contains(a) || !r[a].contains(b)) return nullptr;
    return r[a][b];
  };
  for (const auto& r : results) {
    csv += r["stock_j"].get<std::string>() + "," + r["stock_s"].get<std::string>();
    for (const char* k : qs) csv += "," + cell(at(r, k, "value")) + "," + cell(at(r, k, "se"));
    csv += "," + cell(r.value("corr_idio_returns", json(nullptr)));
    for (const auto& l : plabels) {
      json gj = r.contains("gamma_j") ? at(r["gamma_j"], l, "value") : json(nullptr);
      json gs = r.contains("gamma_s") ? at(r["gamma_s"], l, "value") : json(nullptr);
      csv += "," + cell(gj) + "," + cell(gs);
    }
    if (with_tests) {
      for (const char* t : {"h1", "h2_j", "h2_s", "h3"}) csv += "," + cell(r.contains("tests") ? at(r["tests"], t, "p_value") : json(nullptr));
      csv += "," + cell(r["reject_h1"]) + "," + cell(r["reject_h3"]);
    }
    csv += "," + cell(r["valid"]) + "\n";
  }
  write_file(prefix + ".csv", csv);
  return flagged ? kExitFlagged : kExitOk;
}

// ---------------------------------------------------------------- report

int run_report(const Options& o) {
  json doc;
  try {
    doc = json::parse(read_file(o.required("input")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("results file: ") + e.what());
  }
  const std::string quantity = o.str("quantity", "corr");
  const std::set<std::string> allowed{"corr", "corr_resid", "qc", "resid_qc", "q"};
  if (!allowed.count(quantity)) throw Error(ErrorCode::ConfigError, "unknown quantity '" + quantity + "'");
  const std::string test = o.str("test", quantity == "corr_resid" || quantity == "resid_qc" ? "h3" : "h1");
  if (test != "h1" && test != "h3") throw Error(ErrorCode::ConfigError, "test must be h1 or h3");
  if (!doc.contains("stocks") || !doc.contains("pairs")) throw Error(ErrorCode::ParseError, "not a results file");
  if (!doc.contains("fdr")) throw Error(ErrorCode::ConfigError, "results lack tests; produce them with 'test'");

  std::vector<std::string> labels = doc["stocks"].get<std::vector<std::string>>();
  const std::size_t m = labels.size();
  std::vector<double> H(m * m, 0.0);
  std::string edges = "source,target," + quantity + ",p_value\n";
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      std::string key = pair_key(labels[a], labels[b]);
      if (!doc["pairs"].contains(key)) continue;
      const json& r = doc["pairs"][key];
      if (!r.value("reject_" + test, false)) continue;
      if (!r.contains(quantity) || !r[quantity]["value"].is_number()) continue;
      double v = r[quantity]["value"].get<double>();
      H[a * m + b] = H[b * m + a] = v;
      edges += labels[a] + "," + labels[b] + "," + format_double(v) + "," + format_double(p_of(r["tests"][test])) + "\n";
    }
  std::string heat = "label";
  for (const auto& l : labels) heat += "," + l;
  heat += "\n";
  for (std::size_t a = 0; a < m; ++a) {
    heat += labels[a];
    for (std::size_t b = 0; b < m; ++b) heat += "," + format_double(H[a * m + b]);
    heat += "\n";
  }
  const std::string prefix = o.required("out");
  write_file(prefix + "_heatmap.csv", heat);
  write_file(prefix + "_edges.csv", edges);
  return kExitOk;
}

// ---------------------------------------------------------------- mc

int run_mc(const Options& o) {
  McConfig mc;
  mc.sim = sim_config(o);
  EstimatorConfig base;
  base.vol_trunc_enabled = false;  // the DGP has no volatility jumps
  mc.est = o.estimator(base);
  mc.reps = static_cast<int>(o.integer("reps", 100));
  if (o.has("thetas")) {
    mc.thetas.clear();
    for (const auto& t : o.list("thetas")) mc.thetas.push_back(parse_double(t));
  }
  if (o.has("methods")) {
    mc.methods.clear();
    for (const auto& m : o.list("methods")) mc.methods.push_back(method_from_string(m));
  }
  if (o.has("alphas")) {
    mc.alphas.clear();
    for (const auto& a : o.list("alphas")) mc.alphas.push_back(parse_double(a));
  }
  mc.tests = !o.boolean("no_tests");
  mc.threads = static_cast<unsigned>(o.integer("threads", 0));
  if (o.boolean("progress"))
    mc.progress = [n = mc.reps](int done) { std::cerr << "\rreplication " << done << "/" << n << std::flush; };
  const std::string prefix = o.required("out");
  McSummary s = mc_run(mc);
  if (mc.progress) std::cerr << "\n";
  write_file(prefix + "_estimands.csv", estimand_csv(s));
  write_file(prefix + "_rejections.csv", rejection_csv(s));
  return kExitOk;
}

}  // namespace ivdep::cli
