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

// Mean response on adherence principal strata from completed datasets.
//
// With potential outcomes for both treatments in every frame, each cell is a
// weighted mean over the chosen randomized arms:
//   S*+ : weight A(1),        value Y(t)
//   S++ : weight A(0) A(1),   value Y(t)
// where for the randomized arm A and Y are the observed values (frames copy
// them verbatim) and the other-arm entries are the imputed draws. This is the
// per-imputation term of each mean-response estimator for the two strata;
// S+* is S*+ with the treatment labels swapped.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "adace/common.hpp"
#include "adace/imputation.hpp"
#include "adace/trial_data.hpp"

namespace adace {

enum class Subset { kE0, kE1, kAll };
enum class Treatment { kControl = 0, kExperimental = 1, kDifference = 2 };
enum class EmptyStratumPolicy { kError, kSkip };

inline const char* to_string(Subset s) {
  switch (s) {
    case Subset::kE0: return "E0";
    case Subset::kE1: return "E1";
    case Subset::kAll: return "E0+E1";
  }
  return "?";
}

inline const char* to_string(Treatment t) {
  switch (t) {
    case Treatment::kControl: return "0";
    case Treatment::kExperimental: return "1";
    case Treatment::kDifference: return "d";
  }
  return "?";
}

class EmptyStratumError : public Error {
 public:
  EmptyStratumError(int m, StratumLabel stratum, Subset subset)
      : Error(std::string("empty stratum ") + to_string(stratum) + " on subset " +
              to_string(subset) + " in imputation " + std::to_string(m)),
        m_(m),
        stratum_(stratum),
        subset_(subset) {}
  int m() const noexcept { return m_; }
  StratumLabel stratum() const noexcept { return stratum_; }
  Subset subset() const noexcept { return subset_; }

 private:
  int m_;
  StratumLabel stratum_;
  Subset subset_;
};

struct CellValue {
  double value = 0.0;
  std::size_t count = 0;
  double within_variance = 0.0;  ///< sample variance of included values / count
};

namespace detail {

/// Evaluates one cell. S+* is S*+ with the arms relabelled; subsets and the
/// outcome column keep their original labels.
template <class Visit>
void for_each_included(const ImputedDataset& d, StratumLabel stratum, int treatment,
                       Subset subset, Visit&& visit) {
  const bool swap = stratum == StratumLabel::SPlusStar;
  const auto& under0 = d.under[swap ? 1 : 0];
  const auto& under1 = d.under[swap ? 0 : 1];
  const auto& value = d.under[treatment].y;
  for (std::size_t j = 0; j < d.n; ++j) {
    if (subset == Subset::kE0 && d.arm[j] != 0) continue;
    if (subset == Subset::kE1 && d.arm[j] != 1) continue;
    const bool in_stratum = stratum == StratumLabel::SPlusPlus
                                ? (under0.a[j] && under1.a[j])
                                : under1.a[j] != 0;
    if (in_stratum) visit(value[j]);
  }
}

}  // namespace detail

/// Weighted mean for (stratum, treatment 0/1, subset) in one imputation.
/// Throws EmptyStratumError when the denominator is zero.
inline CellValue evaluate_cell(const ImputedDataset& d, StratumLabel stratum, int treatment,
                               Subset subset) {
  CompensatedSum sum;
  std::size_t count = 0;
  detail::for_each_included(d, stratum, treatment, subset, [&](double y) {
    sum += y;
    ++count;
  });
  if (count == 0) throw EmptyStratumError(d.m, stratum, subset);
  CellValue c;
  c.count = count;
  c.value = sum.value() / double(count);
  if (count >= 2) {
    CompensatedSum ss;
    detail::for_each_included(d, stratum, treatment, subset, [&](double y) {
      const double e = y - c.value;
      ss += e * e;
    });
    c.within_variance = ss.value() / double(count - 1) / double(count);
  }
  return c;
}

inline double estimate_cell(const ImputedDataset& d, StratumLabel stratum, Treatment treatment,
                            Subset subset) {
  if (treatment == Treatment::kDifference)
    return evaluate_cell(d, stratum, 1, subset).value - evaluate_cell(d, stratum, 0, subset).value;
  return evaluate_cell(d, stratum, static_cast<int>(treatment), subset).value;
}

struct StratumEstimate {
  StratumLabel stratum = StratumLabel::SStarPlus;
  Treatment treatment = Treatment::kControl;
  Subset subset = Subset::kAll;
  std::vector<double> per_imputation;
  std::vector<double> within_variance;  ///< per-imputation variance of the cell
  std::vector<int> imputation_index;    ///< m of each retained imputation
  double pooled = 0.0;
  double n_effective = 0.0;
};

struct StratumEstimates {
  StratumEstimate treat0, treat1, difference;
  std::size_t skipped = 0;

  const StratumEstimate& operator[](Treatment t) const {
    return t == Treatment::kControl ? treat0 : t == Treatment::kExperimental ? treat1 : difference;
  }
};

/// Streams completed datasets one at a time (so M copies never need to be
/// held in memory) and pools them for one (stratum, subset).
class EstimateAccumulator {
 public:
  EstimateAccumulator(StratumLabel stratum, Subset subset,
                      EmptyStratumPolicy policy = EmptyStratumPolicy::kError)
      : stratum_(stratum), subset_(subset), policy_(policy) {
    for (auto* e : {&r_.treat0, &r_.treat1, &r_.difference}) {
      e->stratum = stratum;
      e->subset = subset;
    }
    r_.treat0.treatment = Treatment::kControl;
    r_.treat1.treatment = Treatment::kExperimental;
    r_.difference.treatment = Treatment::kDifference;
  }

  void add(const ImputedDataset& d) {
    CellValue c0, c1;
    try {
      c0 = evaluate_cell(d, stratum_, 0, subset_);
      c1 = evaluate_cell(d, stratum_, 1, subset_);
    } catch (const EmptyStratumError&) {
      if (policy_ == EmptyStratumPolicy::kError) throw;
      ++r_.skipped;
      return;
    }
    push(r_.treat0, d.m, c0.value, c0.within_variance, double(c0.count));
    push(r_.treat1, d.m, c1.value, c1.within_variance, double(c1.count));
    push(r_.difference, d.m, c1.value - c0.value, c0.within_variance + c1.within_variance,
         0.5 * double(c0.count + c1.count));
  }

  std::size_t retained() const noexcept { return r_.treat0.per_imputation.size(); }

  /// Pooled result; throws EmptyStratumError if every imputation was skipped.
  StratumEstimates result() const {
    if (retained() == 0) throw EmptyStratumError(-1, stratum_, subset_);
    StratumEstimates out = r_;
    for (auto* e : {&out.treat0, &out.treat1, &out.difference}) {
      CompensatedSum v;
      for (double x : e->per_imputation) v += x;
      e->pooled = v.value() / double(e->per_imputation.size());
      e->n_effective = n_sum(*e) / double(e->per_imputation.size());
    }
    return out;
  }

 private:
  void push(StratumEstimate& e, int m, double value, double within, double count) {
    e.per_imputation.push_back(value);
    e.within_variance.push_back(within);
    e.imputation_index.push_back(m);
    counts_[static_cast<int>(e.treatment)].push_back(count);
  }
  double n_sum(const StratumEstimate& e) const {
    CompensatedSum s;
    for (double c : counts_[static_cast<int>(e.treatment)]) s += c;
    return s.value();
  }

  StratumLabel stratum_;
  Subset subset_;
  EmptyStratumPolicy policy_;
  StratumEstimates r_;
  std::array<std::vector<double>, 3> counts_;
};

/// Pooled estimates (control, experimental, difference) over imputations.
inline StratumEstimates estimate(std::span<const ImputedDataset> imputations, StratumLabel stratum,
                                 Subset subset = Subset::kAll,
                                 EmptyStratumPolicy policy = EmptyStratumPolicy::kError) {
  if (imputations.empty()) throw Error("estimate: need at least one imputation");
  EstimateAccumulator acc(stratum, subset, policy);
  for (const auto& d : imputations) acc.add(d);
  return acc.result();
}

/// Imputes M times under `plan` and pools, without retaining the copies.
inline std::vector<StratumEstimates> estimate_pipeline(
    const detail::NumericTrial& data, const ImputationPlan& plan, int M, std::uint64_t seed,
    std::span<const std::pair<StratumLabel, Subset>> targets,
    EmptyStratumPolicy policy = EmptyStratumPolicy::kError) {
  if (M < 1) throw Error("M must be at least 1");
  FittedImputationModel fitted(data, plan);
  std::vector<EstimateAccumulator> acc;
  for (const auto& [s, sub] : targets) acc.emplace_back(s, sub, policy);
  ImputedDataset buffer;
  for (int m = 0; m < M; ++m) {
    Stream rng = imputation_stream(seed, m);
    fitted.draw(data, m, rng, buffer);
    for (auto& a : acc) a.add(buffer);
  }
  std::vector<StratumEstimates> out;
  for (const auto& a : acc) out.push_back(a.result());
  return out;
}

inline StratumEstimates estimate_pipeline(const TrialDataset& dataset, const ImputationPlan& plan,
                                          int M, std::uint64_t seed, StratumLabel stratum,
                                          Subset subset = Subset::kAll) {
  const std::pair<StratumLabel, Subset> target{stratum, subset};
  return estimate_pipeline(detail::NumericTrial::from(dataset), plan, M, seed,
                           std::span(&target, 1))
      .front();
}

/// Principal-score comparator: the same pipeline with every model
/// conditioned on baseline covariates only.
inline StratumEstimates estimate_principal_score_comparator(const TrialDataset& dataset, int M,
                                                            std::uint64_t seed,
                                                            StratumLabel stratum,
                                                            Subset subset = Subset::kAll) {
  return estimate_pipeline(dataset,
                           ImputationPlan::make(PlanMode::kBaselineOnly, dataset.p(), dataset.K()),
                           M, seed, stratum, subset);
}

/// Rows: stratum,subset,treatment,estimate,n_effective,M
inline void write_estimate_rows(std::ostream& out, std::span<const StratumEstimates> results,
                                bool header = true) {
  if (header) out << "stratum,subset,treatment,estimate,n_effective,M\n";
  for (const auto& r : results)
    for (const auto* e : {&r.treat0, &r.treat1, &r.difference})
      out << to_string(e->stratum) << ',' << to_string(e->subset) << ','
          << to_string(e->treatment) << ',' << format_double(e->pooled) << ','
          << format_double(e->n_effective) << ',' << e->per_imputation.size() << '\n';
}

}  // namespace adace
