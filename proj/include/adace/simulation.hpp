/*
 * Copyright 2026 The adace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Two-arm diabetes-style trial generator, Monte Carlo truth for the
// adherence strata, and the replication study harness.
//
// Generating model, per subject and hypothetical treatment t:
//   X        ~ N(mu_x, sigma_x^2)                     (shared by both t)
//   Z(t)_k   = alpha0_k + alpha1_k X + alpha2_k t + eta_k,   eta_k ~ N(0, sigma_eta^2)
//   Y(t)     = beta0 + beta1 X + beta2 t + sum_k beta3_k Z(t)_k + eps,  eps ~ N(0, sigma_eps^2)
//   logit P(I(t)_k = 1 | I(t)_{k-1} = 1, X, Z(t)_k) = gamma0 + gamma1 X + gamma3_k Z(t)_k
// with independent noise for t = 0 and t = 1 and an absorbing dropout.

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adace/common.hpp"
#include "adace/estimators.hpp"
#include "adace/imputation.hpp"
#include "adace/inference.hpp"
#include "adace/parallel.hpp"
#include "adace/rng.hpp"
#include "adace/trial_data.hpp"

namespace adace {

struct SettingConfig {
  double mu_x = 8.0;
  double sigma_x = 1.0;
  std::vector<double> alpha0{2.3, 2.3, 2.3};
  std::vector<double> alpha1{-0.3, -0.3, -0.3};
  std::vector<double> alpha2{-0.4, -0.9, -1.2};
  double beta0 = 0.2;
  double beta1 = -0.02;
  double beta2 = -0.2;
  std::vector<double> beta3{0.2, 0.4, 0.7};
  double sigma_eta = 0.4;
  double sigma_eps = 0.3;
  double gamma0 = 3.0;
  double gamma1 = -0.1;
  std::vector<double> gamma3{-1.0, -2.0, -2.5};
  int n_per_arm = 150;
  int K = 4;
  bool randomize_arms = false;  ///< fair coin per subject instead of a fixed split

  std::size_t periods() const { return static_cast<std::size_t>(K - 1); }

  void validate() const {
    auto finite = [](double v, const char* name) {
      if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
    };
    auto positive = [&](double v, const char* name) {
      finite(v, name);
      if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    };
    if (K < 2) throw ConfigError("K must be at least 2");
    positive(sigma_x, "sigma_x");
    positive(sigma_eta, "sigma_eta");
    positive(sigma_eps, "sigma_eps");
    for (auto [v, name] : {std::pair{mu_x, "mu_x"}, {beta0, "beta0"}, {beta1, "beta1"},
                           {beta2, "beta2"}, {gamma0, "gamma0"}, {gamma1, "gamma1"}})
      finite(v, name);
    for (auto [vec, name] : {std::pair{&alpha0, "alpha0"}, {&alpha1, "alpha1"}, {&alpha2, "alpha2"},
                             {&beta3, "beta3"}, {&gamma3, "gamma3"}}) {
      if (vec->size() != periods())
        throw ConfigError(std::string(name) + " must have K-1 = " + std::to_string(periods()) +
                          " entries");
      for (double v : *vec) finite(v, name);
    }
    if (n_per_arm < 2) throw ConfigError("n_per_arm must be at least 2");
  }

  bool operator==(const SettingConfig&) const = default;

  static SettingConfig setting1() { return SettingConfig{}; }

  static SettingConfig setting2() {
    SettingConfig c;
    c.gamma1 = -0.25;
    return c;
  }

  static SettingConfig preset(std::string_view name);

  /// Flat `key = value` text; vectors are comma separated.
  std::string to_key_value() const {
    std::ostringstream o;
    auto vec = [](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
      return s;
    };
    o << "mu_x = " << format_double(mu_x) << '\n'
      << "sigma_x = " << format_double(sigma_x) << '\n'
      << "alpha0 = " << vec(alpha0) << '\n'
      << "alpha1 = " << vec(alpha1) << '\n'
      << "alpha2 = " << vec(alpha2) << '\n'
      << "beta0 = " << format_double(beta0) << '\n'
      << "beta1 = " << format_double(beta1) << '\n'
      << "beta2 = " << format_double(beta2) << '\n'
      << "beta3 = " << vec(beta3) << '\n'
      << "sigma_eta = " << format_double(sigma_eta) << '\n'
      << "sigma_eps = " << format_double(sigma_eps) << '\n'
      << "gamma0 = " << format_double(gamma0) << '\n'
      << "gamma1 = " << format_double(gamma1) << '\n'
      << "gamma3 = " << vec(gamma3) << '\n'
      << "n_per_arm = " << n_per_arm << '\n'
      << "K = " << K << '\n'
      << "randomize_arms = " << (randomize_arms ? 1 : 0) << '\n';
    return o.str();
  }

  /// Keys not present keep their setting-1 defaults; unknown keys are errors.
  static SettingConfig from_key_value(std::string_view text) {
    SettingConfig c;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) {
        if (end == text.size()) break;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const std::string_view value = trim(line.substr(eq + 1));
      auto scalar = [&]() {
        auto v = parse_double(value);
        if (!v) throw ParseError(line_no, "invalid number for " + key);
        return *v;
      };
      auto vector = [&]() {
        std::vector<double> out;
        for (auto f : split_view(value, ',')) {
          auto v = parse_double(trim(f));
          if (!v) throw ParseError(line_no, "invalid number in " + key);
          out.push_back(*v);
        }
        return out;
      };
      auto integer = [&]() {
        auto v = parse_int<int>(value);
        if (!v) throw ParseError(line_no, "invalid integer for " + key);
        return *v;
      };
      if (key == "mu_x") c.mu_x = scalar();
      else if (key == "sigma_x") c.sigma_x = scalar();
      else if (key == "alpha0") c.alpha0 = vector();
      else if (key == "alpha1") c.alpha1 = vector();
      else if (key == "alpha2") c.alpha2 = vector();
      else if (key == "beta0") c.beta0 = scalar();
      else if (key == "beta1") c.beta1 = scalar();
      else if (key == "beta2") c.beta2 = scalar();
      else if (key == "beta3") c.beta3 = vector();
      else if (key == "sigma_eta") c.sigma_eta = scalar();
      else if (key == "sigma_eps") c.sigma_eps = scalar();
      else if (key == "gamma0") c.gamma0 = scalar();
      else if (key == "gamma1") c.gamma1 = scalar();
      else if (key == "gamma3") c.gamma3 = vector();
      else if (key == "n_per_arm") c.n_per_arm = integer();
      else if (key == "K") c.K = integer();
      else if (key == "randomize_arms") c.randomize_arms = integer() != 0;
      else throw ParseError(line_no, "unknown key " + key);
      if (end == text.size()) break;
    }
    c.validate();
    return c;
  }
};

/// Treatment-effect coefficients zeroed: alpha2 = 0, beta2 = 0.
inline SettingConfig make_null(const SettingConfig& cfg) {
  SettingConfig c = cfg;
  std::fill(c.alpha2.begin(), c.alpha2.end(), 0.0);
  c.beta2 = 0.0;
  return c;
}

inline SettingConfig SettingConfig::preset(std::string_view name) {
  if (name == "setting1") return setting1();
  if (name == "setting2") return setting2();
  if (name == "setting1-null") return make_null(setting1());
  if (name == "setting2-null") return make_null(setting2());
  throw ConfigError("unknown setting '" + std::string(name) +
                    "' (expected setting1, setting2, setting1-null, setting2-null)");
}

// ---------------------------------------------------------------------------
// Generation

namespace detail {

/// Potential outcomes of one subject under treatment t given X.
inline void draw_potential(const SettingConfig& cfg, double x, int t, Stream& rng,
                           PotentialArm& out) {
  const std::size_t periods = cfg.periods();
  out.z.resize(periods);
  out.i.resize(periods);
  out.z_prov.assign(periods, Provenance::Observed);
  out.i_prov.assign(periods, Provenance::Observed);
  out.y_prov = Provenance::Observed;
  double y = cfg.beta0 + cfg.beta1 * x + cfg.beta2 * t;
  for (std::size_t k = 0; k < periods; ++k) {
    out.z[k] = cfg.alpha0[k] + cfg.alpha1[k] * x + cfg.alpha2[k] * t + cfg.sigma_eta * rng.normal();
    y += cfg.beta3[k] * out.z[k];
  }
  out.y = y + cfg.sigma_eps * rng.normal();
  int at_risk = 1;
  for (std::size_t k = 0; k < periods; ++k) {
    if (at_risk)
      at_risk = rng.bernoulli(expit(cfg.gamma0 + cfg.gamma1 * x + cfg.gamma3[k] * out.z[k])) ? 1 : 0;
    out.i[k] = at_risk;
  }
  out.a = at_risk;
}

}  // namespace detail

struct GeneratedTrial {
  TrialDataset dataset;
  std::vector<PotentialOutcomeFrame> truth;  ///< full potential outcomes, no masking
};

inline GeneratedTrial generate_trial(const SettingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Stream rng = Stream::derive(seed, {tag(StreamTag::kTrial)});
  const int n = 2 * cfg.n_per_arm;
  const std::size_t periods = cfg.periods();
  const int width = static_cast<int>(std::to_string(n).size());
  std::vector<SubjectRecord> records;
  GeneratedTrial g;
  records.reserve(static_cast<std::size_t>(n));
  g.truth.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int arm = cfg.randomize_arms ? (rng.bernoulli(0.5) ? 1 : 0) : (j < cfg.n_per_arm ? 0 : 1);
    const double x = cfg.mu_x + cfg.sigma_x * rng.normal();
    PotentialOutcomeFrame f;
    for (int t = 0; t < 2; ++t) detail::draw_potential(cfg, x, t, rng, f.under[t]);

    const PotentialArm& own = f.under[arm];
    SubjectRecord r;
    std::ostringstream id;
    id << 'S' << std::setw(width) << std::setfill('0') << (j + 1);
    r.subject_id = id.str();
    r.arm = arm;
    r.x = {x};
    bool at_risk = true;
    for (std::size_t k = 0; k < periods; ++k) {
      r.z.push_back(at_risk ? std::optional<double>(own.z[k]) : std::nullopt);
      r.i_flags.push_back(own.i[k]);
      at_risk = own.i[k] == 1;
    }
    if (own.a) r.y = own.y;
    records.push_back(std::move(r));
    g.truth.push_back(std::move(f));
  }
  g.dataset = TrialDataset(std::move(records), 1, static_cast<std::size_t>(cfg.K));
  return g;
}

// ---------------------------------------------------------------------------
// Monte Carlo truth

struct OracleEntry {
  double mean = 0.0;
  double mc_se = 0.0;
};

struct OracleTruth {
  std::int64_t n_oracle = 0;
  /// [stratum: 0 = S*+, 1 = S++][treatment 0, 1, difference]
  std::array<std::array<OracleEntry, 3>, 2> entries{};
  std::array<std::int64_t, 2> stratum_count{};

  static std::size_t stratum_slot(StratumLabel s) {
    if (s == StratumLabel::SStarPlus) return 0;
    if (s == StratumLabel::SPlusPlus) return 1;
    throw Error("oracle truth covers S*+ and S++ only");
  }
  const OracleEntry& at(StratumLabel s, Treatment t) const {
    return entries[stratum_slot(s)][static_cast<std::size_t>(t)];
  }
  /// Population value; the same for every randomized subset.
  double value(const Parameter& p) const { return at(p.stratum, p.treatment).mean; }
};

/// Brute-force truth: simulates n subjects' joint potential outcomes and
/// averages Y(0), Y(1) and Y(1) - Y(0) within each stratum. Chunks of
/// 2^16 subjects have their own streams, so the result does not depend on
/// the thread count.
inline OracleTruth oracle_truth(const SettingConfig& cfg, std::int64_t n, std::uint64_t seed,
                                int threads = 1) {
  cfg.validate();
  if (n < 1) throw Error("oracle_truth: n must be positive");
  constexpr std::int64_t kChunk = 1 << 16;
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);

  struct Moments {
    std::int64_t count = 0;
    std::array<CompensatedSum, 3> sum, sumsq;
  };
  using ChunkResult = std::array<Moments, 2>;
  std::vector<ChunkResult> partial(chunks);

  parallel_for(chunks, threads, [&](std::size_t c) {
    Stream rng = Stream::derive(seed, {tag(StreamTag::kOracle), c});
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min<std::int64_t>(n, begin + kChunk);
    PotentialOutcomeFrame f;
    ChunkResult& acc = partial[c];
    for (std::int64_t j = begin; j < end; ++j) {
      const double x = cfg.mu_x + cfg.sigma_x * rng.normal();
      for (int t = 0; t < 2; ++t) detail::draw_potential(cfg, x, t, rng, f.under[t]);
      const double y0 = f.under[0].y, y1 = f.under[1].y;
      const std::array<double, 3> v{y0, y1, y1 - y0};
      auto add = [&](Moments& m) {
        ++m.count;
        for (int q = 0; q < 3; ++q) {
          m.sum[q] += v[q];
          m.sumsq[q] += v[q] * v[q];
        }
      };
      if (f.under[1].a) {
        add(acc[0]);
        if (f.under[0].a) add(acc[1]);
      }
    }
  });

  OracleTruth truth;
  truth.n_oracle = n;
  for (std::size_t s = 0; s < 2; ++s) {
    std::int64_t count = 0;
    std::array<CompensatedSum, 3> sum, sumsq;
    for (const auto& part : partial) {
      count += part[s].count;
      for (int q = 0; q < 3; ++q) {
        sum[q].merge(part[s].sum[q]);
        sumsq[q].merge(part[s].sumsq[q]);
      }
    }
    if (count < 2) throw Error("oracle_truth: stratum is empty");
    truth.stratum_count[s] = count;
    for (int q = 0; q < 3; ++q) {
      const double mean = sum[q].value() / double(count);
      const double var =
          std::max(0.0, (sumsq[q].value() - double(count) * mean * mean) / double(count - 1));
      truth.entries[s][q] = {mean, std::sqrt(var / double(count))};
    }
  }
  return truth;
}

inline void write_oracle_csv(std::ostream& out, const OracleTruth& t) {
  out << "parameter,true,mc_se,stratum_count,n_oracle\n";
  for (const auto& p : standard_parameters()) {
    const auto& e = t.at(p.stratum, p.treatment);
    out << p.name() << ',' << format_double(e.mean) << ',' << format_double(e.mc_se) << ','
        << t.stratum_count[OracleTruth::stratum_slot(p.stratum)] << ',' << t.n_oracle << '\n';
  }
}

// ---------------------------------------------------------------------------
// Replication study

struct StudyOptions {
  int R = 500;
  int M = 100;
  int B = 50;
  int M_b = 0;  ///< imputations per bootstrap replicate; 0 means M
  std::uint64_t seed = 1;
  int threads = 1;
  double alpha = 0.05;
  bool bootstrap = true;
  bool rubin = true;
  bool comparator = false;  ///< also run the baseline-only plan
  bool null_test = false;   ///< report the z-test rejection rate for mu_d,++
};

struct ReplicationRecord {
  bool ok = false;
  std::string error;
  std::vector<double> estimate;
  std::vector<double> boot_se;
  std::vector<ConfidenceInterval> boot_ci;
  std::vector<double> rubin_se;
  std::vector<ConfidenceInterval> rubin_ci;
  std::vector<double> comparator_estimate;
  bool boot_unreliable = false;
};

struct ParameterSummary {
  Parameter parameter;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double empirical_sd = 0.0;
  double boot_se = std::nan("");
  double boot_cp = std::nan("");
  double rubin_se = std::nan("");
  double rubin_cp = std::nan("");
  double reject_rate = std::nan("");
  double comparator_estimate = std::nan("");
  double comparator_bias = std::nan("");
};

struct StudyReport {
  SettingConfig config;
  StudyOptions options;
  int R = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
  std::vector<ParameterSummary> parameters;
  std::vector<ReplicationRecord> replications;

  const ParameterSummary& operator[](const Parameter& p) const {
    for (const auto& s : parameters)
      if (s.parameter == p) return s;
    throw Error("parameter not in report: " + p.name());
  }
};

/// One replication of the study; seeds are derived from (seed, r) so any
/// replication can be re-run in isolation.
inline ReplicationRecord run_replication(const SettingConfig& cfg, const StudyOptions& opt,
                                         int r) {
  const auto params = standard_parameters();
  const std::vector<std::pair<StratumLabel, Subset>> targets{
      {StratumLabel::SStarPlus, Subset::kAll}, {StratumLabel::SPlusPlus, Subset::kAll}};
  const auto ur = static_cast<std::uint64_t>(r);
  ReplicationRecord rec;
  try {
    const auto trial = generate_trial(cfg, Stream::derive(opt.seed, {tag(StreamTag::kTrial), ur}).key());
    const auto data = detail::NumericTrial::from(trial.dataset);
    const auto full = ImputationPlan::make(PlanMode::kFull, data.p, data.periods + 1);
    const std::uint64_t imp_seed = Stream::derive(opt.seed, {tag(StreamTag::kImpute), ur}).key();
    const auto results = estimate_pipeline(data, full, opt.M, imp_seed, targets);
    auto stratum_result = [&](const Parameter& p) -> const StratumEstimates& {
      return results[p.stratum == StratumLabel::SStarPlus ? 0 : 1];
    };
    for (const auto& p : params) {
      const auto& e = stratum_result(p)[p.treatment];
      rec.estimate.push_back(e.pooled);
      if (opt.rubin && opt.M >= 2) {
        const auto rr = rubin_pool(e, opt.alpha);
        rec.rubin_se.push_back(rr.se);
        rec.rubin_ci.push_back(rr.ci);
      }
    }
    if (opt.bootstrap) {
      BootstrapOptions bo;
      bo.B = opt.B;
      bo.M_b = opt.M_b > 0 ? opt.M_b : opt.M;
      bo.seed = Stream::derive(opt.seed, {tag(StreamTag::kBootstrap), ur}).key();
      bo.alpha = opt.alpha;
      bo.threads = 1;
      const auto boot = bootstrap(data, full, params, rec.estimate, bo);
      for (const auto& b : boot) {
        rec.boot_se.push_back(b.se);
        rec.boot_ci.push_back(b.ci);
        rec.boot_unreliable = rec.boot_unreliable || b.unreliable;
      }
    }
    if (opt.comparator) {
      const auto baseline = ImputationPlan::make(PlanMode::kBaselineOnly, data.p, data.periods + 1);
      const auto cres = estimate_pipeline(data, baseline, opt.M, imp_seed, targets);
      for (const auto& p : params)
        rec.comparator_estimate.push_back(cres[p.stratum == StratumLabel::SStarPlus ? 0 : 1][p.treatment].pooled);
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec = ReplicationRecord{};
    rec.error = "replication " + std::to_string(r) + ": " + e.what();
  }
  return rec;
}

inline StudyReport run_study(const SettingConfig& cfg, const OracleTruth& truth,
                             const StudyOptions& opt) {
  cfg.validate();
  if (opt.R < 1) throw Error("run_study: R must be at least 1");
  if (opt.M < 1) throw Error("run_study: M must be at least 1");
  if (opt.bootstrap && opt.B < 2) throw Error("run_study: B must be at least 2");

  StudyReport report;
  report.config = cfg;
  report.options = opt;
  report.R = opt.R;
  report.replications.resize(static_cast<std::size_t>(opt.R));
  parallel_for(report.replications.size(), opt.threads, [&](std::size_t r) {
    report.replications[r] = run_replication(cfg, opt, static_cast<int>(r));
  });

  for (const auto& rec : report.replications) {
    if (!rec.ok) {
      ++report.failures;
      report.failure_messages.push_back(rec.error);
    }
  }
  const auto params = standard_parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParameterSummary s;
    s.parameter = params[i];
    s.truth = truth.value(params[i]);
    CompensatedSum est, est2, bse, bcp, rse, rcp, rej, cmp;
    std::size_t n = 0, nb = 0, nr = 0, nc = 0;
    for (const auto& rec : report.replications) {
      if (!rec.ok) continue;
      ++n;
      est += rec.estimate[i];
      est2 += rec.estimate[i] * rec.estimate[i];
      if (!rec.boot_se.empty() && std::isfinite(rec.boot_se[i])) {
        ++nb;
        bse += rec.boot_se[i];
        bcp += rec.boot_ci[i].covers(s.truth) ? 1.0 : 0.0;
        if (rec.boot_se[i] > 0.0) rej += z_test(rec.estimate[i], rec.boot_se[i]) < opt.alpha ? 1.0 : 0.0;
      }
      if (!rec.rubin_se.empty()) {
        ++nr;
        rse += rec.rubin_se[i];
        rcp += rec.rubin_ci[i].covers(s.truth) ? 1.0 : 0.0;
      }
      if (!rec.comparator_estimate.empty()) {
        ++nc;
        cmp += rec.comparator_estimate[i];
      }
    }
    if (n > 0) {
      s.mean_estimate = est.value() / double(n);
      s.bias = s.mean_estimate - s.truth;
      if (n > 1)
        s.empirical_sd = std::sqrt(std::max(
            0.0, (est2.value() - double(n) * s.mean_estimate * s.mean_estimate) / double(n - 1)));
    } else {
      s.mean_estimate = s.bias = std::nan("");
    }
    if (nb > 0) {
      s.boot_se = bse.value() / double(nb);
      s.boot_cp = bcp.value() / double(nb);
      const bool reject_reported = params[i] == Parameter{StratumLabel::SPlusPlus, Subset::kAll,
                                                          Treatment::kDifference};
      if (opt.null_test && reject_reported) s.reject_rate = rej.value() / double(nb);
    }
    if (nr > 0) {
      s.rubin_se = rse.value() / double(nr);
      s.rubin_cp = rcp.value() / double(nr);
    }
    if (nc > 0) {
      s.comparator_estimate = cmp.value() / double(nc);
      s.comparator_bias = s.comparator_estimate - s.truth;
    }
    report.parameters.push_back(s);
  }
  return report;
}

/// parameter,true,estimate,bias,boot_se,boot_cp,rubin_se,rubin_cp
/// [,reject_rate] [,ps_estimate,ps_bias]
inline void write_report_csv(std::ostream& out, const StudyReport& report) {
  const bool null_col = report.options.null_test;
  const bool cmp_col = report.options.comparator;
  out << "parameter,true,estimate,bias,boot_se,boot_cp,rubin_se,rubin_cp";
  if (null_col) out << ",reject_rate";
  if (cmp_col) out << ",ps_estimate,ps_bias";
  out << '\n';
  auto cell = [&](double v) {
    out << ',';
    if (!std::isnan(v)) out << format_double(v);
  };
  for (const auto& s : report.parameters) {
    out << s.parameter.name();
    cell(s.truth);
    cell(s.mean_estimate);
    cell(s.bias);
    cell(s.boot_se);
    cell(s.boot_cp);
    cell(s.rubin_se);
    cell(s.rubin_cp);
    if (null_col) cell(s.reject_rate);
    if (cmp_col) {
      cell(s.comparator_estimate);
      cell(s.comparator_bias);
    }
    out << '\n';
  }
}

}  // namespace adace
