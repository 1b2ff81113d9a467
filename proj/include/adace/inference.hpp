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

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "adace/common.hpp"
#include "adace/estimators.hpp"
#include "adace/imputation.hpp"
#include "adace/parallel.hpp"
#include "adace/rng.hpp"

namespace adace {

/// One scalar target: a treatment mean or difference on a stratum/subset.
struct Parameter {
  StratumLabel stratum = StratumLabel::SPlusPlus;
  Subset subset = Subset::kAll;
  Treatment treatment = Treatment::kDifference;

  /// e.g. "mu_d,++" or "mu_0,*+[E1]"
  std::string name() const {
    std::string s = std::string("mu_") + to_string(treatment) + ",";
    switch (stratum) {
      case StratumLabel::SStarPlus: s += "*+"; break;
      case StratumLabel::SPlusStar: s += "+*"; break;
      case StratumLabel::SPlusPlus: s += "++"; break;
    }
    if (subset != Subset::kAll) s += std::string("[") + to_string(subset) + "]";
    return s;
  }

  bool operator==(const Parameter&) const = default;
};

/// The six parameters reported by the simulation study, E0 u E1 subset.
inline std::vector<Parameter> standard_parameters() {
  std::vector<Parameter> v;
  for (auto s : {StratumLabel::SStarPlus, StratumLabel::SPlusPlus})
    for (auto t : {Treatment::kControl, Treatment::kExperimental, Treatment::kDifference})
      v.push_back({s, Subset::kAll, t});
  return v;
}

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool covers(double v) const noexcept { return lo <= v && v <= hi; }
};

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Two-sided normal p-value for H0: parameter == null.
inline double z_test(double estimate, double se, double null_value = 0.0) {
  if (!(se > 0.0)) throw Error("z_test: standard error must be positive");
  return std::erfc(std::abs(estimate - null_value) / se / std::sqrt(2.0));
}

// ---------------------------------------------------------------------------
// Rubin's rules

struct RubinResult {
  int M = 0;
  double qbar = 0.0;
  double w = 0.0;          ///< mean within-imputation variance
  double b = 0.0;          ///< between-imputation variance
  double total_var = 0.0;  ///< w + (1 + 1/M) b
  double se = 0.0;
  double df = 0.0;         ///< Barnard-Rubin degrees of freedom
  ConfidenceInterval ci;
};

inline RubinResult rubin_pool(std::span<const double> estimates, std::span<const double> variances,
                              double complete_df, double alpha = 0.05) {
  const auto M = estimates.size();
  if (M < 2) throw Error("rubin_pool: need at least two imputations");
  if (variances.size() != M) throw Error("rubin_pool: estimates/variances size mismatch");
  if (!(complete_df > 0.0)) throw Error("rubin_pool: complete-data df must be positive");
  RubinResult r;
  r.M = static_cast<int>(M);
  CompensatedSum qs, ws;
  for (std::size_t m = 0; m < M; ++m) {
    if (variances[m] < 0.0) throw Error("rubin_pool: negative within variance");
    qs += estimates[m];
    ws += variances[m];
  }
  r.qbar = qs.value() / double(M);
  r.w = ws.value() / double(M);
  CompensatedSum bs;
  for (double q : estimates) bs += (q - r.qbar) * (q - r.qbar);
  r.b = bs.value() / double(M - 1);
  const double inflate = 1.0 + 1.0 / double(M);
  r.total_var = r.w + inflate * r.b;
  r.se = std::sqrt(r.total_var);

  const double lambda = r.total_var > 0.0 ? inflate * r.b / r.total_var : 0.0;
  const double df_old = lambda > 0.0 ? double(M - 1) / (lambda * lambda)
                                     : std::numeric_limits<double>::infinity();
  const double df_obs = (complete_df + 1.0) / (complete_df + 3.0) * complete_df * (1.0 - lambda);
  if (df_obs <= 0.0)
    r.df = df_old;
  else if (std::isinf(df_old))
    r.df = df_obs;
  else
    r.df = 1.0 / (1.0 / df_old + 1.0 / df_obs);

  double tq = std::numeric_limits<double>::infinity();
  try {
    tq = boost::math::quantile(boost::math::students_t_distribution<double>(r.df),
                               1.0 - alpha / 2.0);
  } catch (const std::overflow_error&) {
    // df so small that the quantile is not representable
  }
  r.ci = {r.qbar - tq * r.se, r.qbar + tq * r.se};
  return r;
}

/// Rubin pooling of a pooled stratum estimate, using each imputation's
/// variance-of-mean as the within component and the mean effective count
/// minus one as complete-data degrees of freedom (both arms for differences).
inline RubinResult rubin_pool(const StratumEstimate& e, double alpha = 0.05) {
  const double nu = e.treatment == Treatment::kDifference ? 2.0 * e.n_effective - 2.0
                                                          : e.n_effective - 1.0;
  return rubin_pool(e.per_imputation, e.within_variance, nu, alpha);
}

/// Within-imputation variance of a cell: sample variance of the included
/// values over their count; sum of both arms for a difference.
inline double within_variance(const ImputedDataset& d, StratumLabel stratum, Treatment treatment,
                              Subset subset) {
  if (treatment == Treatment::kDifference)
    return within_variance(d, stratum, Treatment::kControl, subset) +
           within_variance(d, stratum, Treatment::kExperimental, subset);
  const CellValue c = evaluate_cell(d, stratum, static_cast<int>(treatment), subset);
  if (c.count < 2) throw Error("within_variance: need at least two subjects in the cell");
  return c.within_variance;
}

// ---------------------------------------------------------------------------
// Bootstrap with re-imputation

struct BootstrapOptions {
  int B = 50;
  int M_b = 100;  ///< imputations inside each replicate
  std::uint64_t seed = 1;
  double alpha = 0.05;
  int threads = 1;
  double unreliable_fraction = 0.10;
};

struct BootstrapResult {
  Parameter parameter;
  int B = 0;
  std::vector<double> replicate_estimates;  ///< successful replicates in index order
  std::vector<int> replicate_index;
  double estimate = 0.0;
  double se = 0.0;
  ConfidenceInterval ci;
  std::size_t skipped = 0;
  bool unreliable = false;
};

namespace detail {

/// Row indices of a bootstrap sample drawn within each arm.
inline std::vector<std::size_t> stratified_resample(const NumericTrial& data, Stream& rng) {
  std::array<std::vector<std::size_t>, 2> by_arm;
  for (std::size_t j = 0; j < data.n; ++j) by_arm[data.arm[j]].push_back(j);
  std::vector<std::size_t> rows;
  rows.reserve(data.n);
  for (const auto& pool : by_arm)
    for (std::size_t r = 0; r < pool.size(); ++r) rows.push_back(pool[rng.index(pool.size())]);
  return rows;
}

inline std::vector<std::pair<StratumLabel, Subset>> distinct_targets(
    std::span<const Parameter> params) {
  std::vector<std::pair<StratumLabel, Subset>> t;
  for (const auto& p : params) {
    const std::pair<StratumLabel, Subset> key{p.stratum, p.subset};
    if (std::find(t.begin(), t.end(), key) == t.end()) t.push_back(key);
  }
  return t;
}

inline double pick(const std::vector<StratumEstimates>& results,
                   const std::vector<std::pair<StratumLabel, Subset>>& targets,
                   const Parameter& p) {
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (targets[i] == std::pair{p.stratum, p.subset}) return results[i][p.treatment].pooled;
  throw Error("parameter not among targets");
}

}  // namespace detail

/// Stratified bootstrap: each replicate resamples subjects within arm,
/// reruns the imputation pipeline with M_b imputations and re-estimates.
/// The standard error is the SD of replicate estimates and the interval is
/// the normal approximation around `point_estimates`.
inline std::vector<BootstrapResult> bootstrap(const detail::NumericTrial& data,
                                              const ImputationPlan& plan,
                                              std::span<const Parameter> params,
                                              std::span<const double> point_estimates,
                                              const BootstrapOptions& opt) {
  if (opt.B < 2) throw Error("bootstrap: B must be at least 2");
  if (point_estimates.size() != params.size())
    throw Error("bootstrap: one point estimate per parameter required");
  const auto targets = detail::distinct_targets(params);

  struct Replicate {
    bool ok = false;
    std::vector<double> values;
  };
  std::vector<Replicate> reps(static_cast<std::size_t>(opt.B));
  parallel_for(reps.size(), opt.threads, [&](std::size_t b) {
    Stream rs = Stream::derive(opt.seed, {tag(StreamTag::kBootstrap), b, tag(StreamTag::kResample)});
    const auto rows = detail::stratified_resample(data, rs);
    const auto sample = data.resample(rows);
    const std::uint64_t imp_seed = Stream::derive(opt.seed, {tag(StreamTag::kBootstrap), b}).key();
    try {
      const auto results = estimate_pipeline(sample, plan, opt.M_b, imp_seed, targets,
                                             EmptyStratumPolicy::kSkip);
      Replicate r;
      for (const auto& p : params) r.values.push_back(detail::pick(results, targets, p));
      r.ok = true;
      reps[b] = std::move(r);
    } catch (const Error&) {
      reps[b].ok = false;
    }
  });

  const double z = normal_quantile(1.0 - opt.alpha / 2.0);
  std::vector<BootstrapResult> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    BootstrapResult r;
    r.parameter = params[i];
    r.B = opt.B;
    r.estimate = point_estimates[i];
    for (std::size_t b = 0; b < reps.size(); ++b) {
      if (!reps[b].ok) {
        ++r.skipped;
        continue;
      }
      r.replicate_estimates.push_back(reps[b].values[i]);
      r.replicate_index.push_back(static_cast<int>(b));
    }
    r.unreliable = double(r.skipped) > opt.unreliable_fraction * double(opt.B);
    const auto nb = r.replicate_estimates.size();
    if (nb < 2) {
      r.se = std::numeric_limits<double>::quiet_NaN();
      r.unreliable = true;
    } else {
      CompensatedSum s;
      for (double v : r.replicate_estimates) s += v;
      const double mean = s.value() / double(nb);
      CompensatedSum ss;
      for (double v : r.replicate_estimates) ss += (v - mean) * (v - mean);
      r.se = std::sqrt(ss.value() / double(nb - 1));
    }
    r.ci = {r.estimate - z * r.se, r.estimate + z * r.se};
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<BootstrapResult> bootstrap(const TrialDataset& dataset,
                                              const ImputationPlan& plan,
                                              std::span<const Parameter> params,
                                              std::span<const double> point_estimates,
                                              const BootstrapOptions& opt) {
  return bootstrap(detail::NumericTrial::from(dataset), plan, params, point_estimates, opt);
}

/// Rows: parameter,method,estimate,se,ci_lo,ci_hi,B_or_M
inline void write_inference_header(std::ostream& out) {
  out << "parameter,method,estimate,se,ci_lo,ci_hi,B_or_M\n";
}

inline void write_inference_row(std::ostream& out, const BootstrapResult& r) {
  out << r.parameter.name() << ",bootstrap," << format_double(r.estimate) << ','
      << format_double(r.se) << ',' << format_double(r.ci.lo) << ',' << format_double(r.ci.hi)
      << ',' << r.B << '\n';
}

inline void write_inference_row(std::ostream& out, const Parameter& p, const RubinResult& r) {
  out << p.name() << ",rubin," << format_double(r.qbar) << ',' << format_double(r.se) << ','
      << format_double(r.ci.lo) << ',' << format_double(r.ci.hi) << ',' << r.M << '\n';
}

}  // namespace adace
