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

// Counterfactual multiple imputation.
//
// For each arm t a chain of regressions is fitted on arm-t data only:
//   Z(1) | X, Z(2) | X,Z(1), ..., Y | X,Z, and I(k) | X,Z(k) among subjects
//   still adherent before period k.
// Every subject (either arm) then receives potential outcomes under both
// treatments: own-arm observed cells are copied, everything else is drawn
// from the arm-specific chain after drawing the model parameters from their
// approximate posterior (proper imputation).

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "adace/common.hpp"
#include "adace/regression.hpp"
#include "adace/rng.hpp"
#include "adace/trial_data.hpp"

namespace adace {

enum class PlanMode {
  kFull,          ///< X and Z as predictors
  kBaselineOnly,  ///< X only (principal-score comparator)
};

inline const char* to_string(PlanMode m) {
  return m == PlanMode::kFull ? "full" : "baseline-only";
}

struct Predictor {
  enum class Kind { kIntercept, kCovariate, kIntermediate };
  Kind kind = Kind::kIntercept;
  std::size_t index = 0;

  std::string name() const {
    switch (kind) {
      case Kind::kIntercept: return "1";
      case Kind::kCovariate: return "x" + std::to_string(index + 1);
      case Kind::kIntermediate: return "z" + std::to_string(index + 1);
    }
    return "?";
  }
};

enum class StepTarget { kIntermediate, kOutcome, kAdherence };

struct ImputationStep {
  StepTarget target = StepTarget::kIntermediate;
  std::size_t period = 0;  ///< 0-based visit index for Z / I targets
  std::vector<Predictor> predictors;

  std::string name() const {
    switch (target) {
      case StepTarget::kIntermediate: return "z" + std::to_string(period + 1);
      case StepTarget::kOutcome: return "y";
      case StepTarget::kAdherence: return "i" + std::to_string(period + 1);
    }
    return "?";
  }
  std::string formula() const {
    std::string s = name() + " ~";
    for (std::size_t c = 0; c < predictors.size(); ++c)
      s += (c ? " + " : " ") + predictors[c].name();
    return s;
  }
};

struct ImputationPlan {
  PlanMode mode = PlanMode::kFull;
  std::size_t p = 1;
  std::size_t periods = 3;
  std::vector<ImputationStep> steps;
  /// false: plug-in MLE for adherence models instead of a posterior draw
  bool draw_logistic_params = true;

  static ImputationPlan make(PlanMode mode, std::size_t p, std::size_t K) {
    if (K < 2) throw Error("ImputationPlan: K must be at least 2");
    ImputationPlan plan;
    plan.mode = mode;
    plan.p = p;
    plan.periods = K - 1;
    const bool use_z = mode == PlanMode::kFull;
    auto baseline = [&] {
      std::vector<Predictor> v{{Predictor::Kind::kIntercept, 0}};
      for (std::size_t j = 0; j < p; ++j) v.push_back({Predictor::Kind::kCovariate, j});
      return v;
    };
    for (std::size_t k = 0; k < plan.periods; ++k) {
      ImputationStep s{StepTarget::kIntermediate, k, baseline()};
      if (use_z)
        for (std::size_t e = 0; e < k; ++e) s.predictors.push_back({Predictor::Kind::kIntermediate, e});
      plan.steps.push_back(std::move(s));
    }
    {
      ImputationStep s{StepTarget::kOutcome, 0, baseline()};
      if (use_z)
        for (std::size_t e = 0; e < plan.periods; ++e)
          s.predictors.push_back({Predictor::Kind::kIntermediate, e});
      plan.steps.push_back(std::move(s));
    }
    for (std::size_t k = 0; k < plan.periods; ++k) {
      ImputationStep s{StepTarget::kAdherence, k, baseline()};
      if (use_z) s.predictors.push_back({Predictor::Kind::kIntermediate, k});
      plan.steps.push_back(std::move(s));
    }
    return plan;
  }

  /// Every Z predictor is produced by an earlier step.
  bool is_topologically_ordered() const {
    std::vector<bool> have_z(periods, false);
    for (const auto& s : steps) {
      for (const auto& pr : s.predictors)
        if (pr.kind == Predictor::Kind::kIntermediate && (pr.index >= periods || !have_z[pr.index]))
          return false;
      if (s.target == StepTarget::kIntermediate) have_z[s.period] = true;
    }
    return true;
  }
};

/// Error raised while fitting the chain, annotated with arm and step.
class FitError : public Error {
 public:
  FitError(int arm, std::string step, const std::string& what)
      : Error("arm " + std::to_string(arm) + ", step " + step + ": " + what),
        arm_(arm),
        step_(std::move(step)) {}
  int arm() const noexcept { return arm_; }
  const std::string& step() const noexcept { return step_; }

 private:
  int arm_;
  std::string step_;
};

/// One completed copy m. Per hypothetical treatment t, cells are stored
/// subject-major: z[t][j * periods + k].
struct ImputedDataset {
  int m = 0;
  PlanMode plan_mode = PlanMode::kFull;
  std::uint64_t rng_stream_id = 0;
  std::size_t n = 0;
  std::size_t periods = 0;
  std::vector<int> arm;               ///< randomized arm per subject
  std::vector<std::size_t> source;    ///< row in the originating dataset

  struct Hypothetical {
    std::vector<double> z;
    std::vector<unsigned char> i;
    std::vector<unsigned char> a;
    std::vector<double> y;
    std::vector<Provenance> z_prov;
    std::vector<Provenance> i_prov;
    std::vector<Provenance> y_prov;
  };
  std::array<Hypothetical, 2> under;

  void resize(std::size_t n_subjects, std::size_t n_periods) {
    n = n_subjects;
    periods = n_periods;
    arm.resize(n);
    source.resize(n);
    for (auto& h : under) {
      h.z.resize(n * periods);
      h.i.resize(n * periods);
      h.a.resize(n);
      h.y.resize(n);
      h.z_prov.resize(n * periods);
      h.i_prov.resize(n * periods);
      h.y_prov.resize(n);
    }
  }

  PotentialOutcomeFrame frame(std::size_t j) const {
    PotentialOutcomeFrame f;
    for (int t = 0; t < 2; ++t) {
      const auto& h = under[t];
      auto& pa = f.under[t];
      for (std::size_t k = 0; k < periods; ++k) {
        pa.z.push_back(h.z[j * periods + k]);
        pa.i.push_back(h.i[j * periods + k]);
        pa.z_prov.push_back(h.z_prov[j * periods + k]);
        pa.i_prov.push_back(h.i_prov[j * periods + k]);
      }
      pa.a = h.a[j];
      pa.y = h.y[j];
      pa.y_prov = h.y_prov[j];
    }
    return f;
  }

  /// Relabel treatments 0 <-> 1 (randomized arm and hypothetical index).
  ImputedDataset swapped_arms() const {
    ImputedDataset s = *this;
    for (auto& a : s.arm) a = 1 - a;
    std::swap(s.under[0], s.under[1]);
    return s;
  }
};

namespace detail {

/// Flat numeric copy of a validated dataset; cheap to resample.
struct NumericTrial {
  std::size_t n = 0, p = 0, periods = 0;
  std::vector<int> arm;
  std::vector<double> x;               // n * p
  std::vector<double> z;               // n * periods, NaN when missing
  std::vector<unsigned char> z_obs;
  std::vector<unsigned char> i;        // post-dropout flags stored as 0
  std::vector<unsigned char> a;
  std::vector<double> y;
  std::vector<unsigned char> y_obs;
  std::vector<std::size_t> source;

  static NumericTrial from(const TrialDataset& ds) {
    const auto violations = validate(ds);
    if (!violations.empty())
      throw Error("dataset invalid: subject " + violations.front().subject_id + ": " +
                  to_string(violations.front().rule) + " (" + violations.front().detail + ")" +
                  (violations.size() > 1
                       ? " and " + std::to_string(violations.size() - 1) + " more"
                       : ""));
    NumericTrial t;
    t.n = ds.size();
    t.p = ds.p();
    t.periods = ds.periods();
    t.arm.resize(t.n);
    t.x.resize(t.n * t.p);
    t.z.assign(t.n * t.periods, std::nan(""));
    t.z_obs.assign(t.n * t.periods, 0);
    t.i.assign(t.n * t.periods, 0);
    t.a.resize(t.n);
    t.y.assign(t.n, std::nan(""));
    t.y_obs.assign(t.n, 0);
    t.source.resize(t.n);
    for (std::size_t j = 0; j < t.n; ++j) {
      const auto& r = ds[j];
      t.arm[j] = r.arm;
      t.source[j] = j;
      for (std::size_t c = 0; c < t.p; ++c) t.x[j * t.p + c] = *r.x[c];
      for (std::size_t k = 0; k < t.periods; ++k) {
        if (r.z[k]) {
          t.z[j * t.periods + k] = *r.z[k];
          t.z_obs[j * t.periods + k] = 1;
        }
        t.i[j * t.periods + k] = r.i_flags[k].value_or(0) == 1 ? 1 : 0;
      }
      t.a[j] = static_cast<unsigned char>(adherence(r));
      if (r.y) {
        t.y[j] = *r.y;
        t.y_obs[j] = 1;
      }
    }
    return t;
  }

  NumericTrial resample(std::span<const std::size_t> rows) const {
    NumericTrial t;
    t.n = rows.size();
    t.p = p;
    t.periods = periods;
    for (std::size_t r : rows) {
      t.arm.push_back(arm[r]);
      t.x.insert(t.x.end(), x.begin() + r * p, x.begin() + (r + 1) * p);
      t.z.insert(t.z.end(), z.begin() + r * periods, z.begin() + (r + 1) * periods);
      t.z_obs.insert(t.z_obs.end(), z_obs.begin() + r * periods, z_obs.begin() + (r + 1) * periods);
      t.i.insert(t.i.end(), i.begin() + r * periods, i.begin() + (r + 1) * periods);
      t.a.push_back(a[r]);
      t.y.push_back(y[r]);
      t.y_obs.push_back(y_obs[r]);
      t.source.push_back(source[r]);
    }
    return t;
  }

  std::size_t arm_count(int t) const {
    std::size_t c = 0;
    for (int v : arm) c += v == t;
    return c;
  }

  bool at_risk(std::size_t j, std::size_t k) const {
    return k == 0 || i[j * periods + k - 1] == 1;
  }
};

/// Columns kept for a chain fit, in plan order: a column is kept if it is not
/// aliased with those already kept, and at most n - 1 columns are kept so the
/// fit retains a residual degree of freedom.
inline std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& design) {
  std::vector<Eigen::Index> kept;
  const Eigen::Index limit = design.rows() - 1;
  Eigen::MatrixXd trial(design.rows(), 0);
  for (Eigen::Index c = 0; c < design.cols() && Eigen::Index(kept.size()) < limit; ++c) {
    trial.conservativeResize(Eigen::NoChange, trial.cols() + 1);
    trial.col(trial.cols() - 1) = design.col(c);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
    if (qr.rank() == trial.cols())
      kept.push_back(c);
    else
      trial.conservativeResize(Eigen::NoChange, trial.cols() - 1);
  }
  return kept;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
  return out;
}

/// Pseudo-observations that make the logistic likelihood proper under
/// (quasi-)separation: each non-intercept column at mean +/- sd with the
/// others at their means, once with y = 0 and once with y = 1, total weight
/// equal to the number of columns.
inline void augment_logistic(Eigen::MatrixXd& X, Eigen::VectorXd& y, Eigen::VectorXd& w) {
  const auto n = X.rows();
  const auto q = X.cols();
  const auto slopes = q - 1;
  if (slopes <= 0) {
    X.conservativeResize(n + 2, q);
    y.conservativeResize(n + 2);
    w.conservativeResize(n + 2);
    X.row(n).setOnes();
    X.row(n + 1).setOnes();
    y[n] = 0.0;
    y[n + 1] = 1.0;
    w[n] = w[n + 1] = 0.5;
    return;
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::RowVectorXd sd(q);
  for (Eigen::Index c = 0; c < q; ++c)
    sd[c] = n > 1 ? std::sqrt((X.col(c).array() - mean[c]).square().sum() / double(n - 1)) : 0.0;
  const auto extra = 4 * slopes;
  const double weight = double(q) / double(extra);
  X.conservativeResize(n + extra, q);
  y.conservativeResize(n + extra);
  w.conservativeResize(n + extra);
  Eigen::Index row = n;
  for (Eigen::Index c = 1; c < q; ++c) {
    for (double sign : {-1.0, 1.0}) {
      for (double outcome : {0.0, 1.0}) {
        X.row(row) = mean;
        X(row, 0) = 1.0;
        X(row, c) = mean[c] + sign * sd[c];
        y[row] = outcome;
        w[row] = weight;
        ++row;
      }
    }
  }
}

}  // namespace detail

/// A fitted step for one arm. Aliased design columns are dropped and get a
/// zero coefficient.
struct FittedStep {
  ImputationStep step;
  std::vector<Eigen::Index> kept;
  std::optional<LinearImputationModel> linear;
  std::optional<LogisticImputationModel> logistic;
  bool augmented = false;
  std::size_t n_fit = 0;
};

/// Models of both arms for one dataset. Fitting is deterministic; all
/// randomness lives in draw().
class FittedImputationModel {
 public:
  FittedImputationModel(const detail::NumericTrial& data, ImputationPlan plan,
                        LogisticOptions logistic_options = {})
      : plan_(std::move(plan)) {
    if (plan_.p != data.p || plan_.periods != data.periods)
      throw Error("imputation plan shape does not match dataset");
    if (!plan_.is_topologically_ordered())
      throw Error("imputation plan steps are not topologically ordered");
    for (int t = 0; t < 2; ++t) {
      if (data.arm_count(t) == 0) throw Error("arm " + std::to_string(t) + " has no subjects");
      for (const auto& step : plan_.steps) {
        try {
          arms_[t].push_back(fit_step(data, t, step, logistic_options));
        } catch (const Error& e) {
          throw FitError(t, step.name(), e.what());
        }
      }
    }
  }

  const ImputationPlan& plan() const noexcept { return plan_; }
  const std::vector<FittedStep>& steps(int arm) const { return arms_[arm]; }

  /// Fill `out` with imputation m using `rng`.
  void draw(const detail::NumericTrial& data, int m, Stream& rng, ImputedDataset& out) const {
    const std::size_t periods = data.periods;
    const std::size_t p = data.p;
    out.m = m;
    out.plan_mode = plan_.mode;
    out.rng_stream_id = rng.key();
    out.resize(data.n, periods);
    out.arm = data.arm;
    out.source = data.source;

    // Parameter draws, arm by arm in plan order. Coefficients are laid out
    // against the subject row [1, x_1..x_p, z_1..z_{K-1}].
    const std::size_t width = 1 + p + periods;
    struct Drawn {
      std::vector<std::size_t> cols;
      std::vector<double> coef;
      double sigma = 0.0;
    };
    std::array<std::vector<Drawn>, 2> drawn;
    for (int t = 0; t < 2; ++t) {
      drawn[t].reserve(arms_[t].size());
      for (const auto& fs : arms_[t]) {
        Eigen::VectorXd reduced;
        double sigma = 0.0;
        if (fs.linear) {
          auto ld = draw_linear(*fs.linear, rng);
          reduced = std::move(ld.coef);
          sigma = ld.sigma;
        } else if (plan_.draw_logistic_params) {
          reduced = draw_logistic(*fs.logistic, rng);
        } else {
          if (!fs.logistic->converged) throw NotConvergedError("adherence model did not converge");
          reduced = fs.logistic->coef_hat;
        }
        Drawn d;
        d.sigma = sigma;
        for (std::size_t c = 0; c < fs.kept.size(); ++c) {
          d.cols.push_back(row_index(fs.step.predictors[fs.kept[c]], p));
          d.coef.push_back(reduced[static_cast<Eigen::Index>(c)]);
        }
        drawn[t].push_back(std::move(d));
      }
    }

    std::vector<double> row(width);
    auto linear_predictor = [&](const Drawn& d) {
      double eta = 0.0;
      for (std::size_t c = 0; c < d.cols.size(); ++c) eta += d.coef[c] * row[d.cols[c]];
      return eta;
    };

    for (std::size_t j = 0; j < data.n; ++j) {
      row[0] = 1.0;
      std::copy_n(&data.x[j * p], p, row.begin() + 1);
      double* zrow = row.data() + 1 + p;
      for (int t = 0; t < 2; ++t) {
        auto& h = out.under[t];
        const bool own = data.arm[j] == t;
        double* z = &h.z[j * periods];
        unsigned char* iv = &h.i[j * periods];
        Provenance* zp = &h.z_prov[j * periods];
        Provenance* ip = &h.i_prov[j * periods];
        unsigned char at_risk = 1;
        for (std::size_t s = 0; s < arms_[t].size(); ++s) {
          const ImputationStep& step = arms_[t][s].step;
          const Drawn& d = drawn[t][s];
          const std::size_t k = step.period;
          switch (step.target) {
            case StepTarget::kIntermediate:
              if (own && data.z_obs[j * periods + k]) {
                z[k] = data.z[j * periods + k];
                zp[k] = Provenance::Observed;
              } else {
                z[k] = linear_predictor(d) + d.sigma * rng.normal();
                zp[k] = Provenance::Imputed;
              }
              zrow[k] = z[k];
              break;
            case StepTarget::kOutcome:
              if (own && data.y_obs[j]) {
                h.y[j] = data.y[j];
                h.y_prov[j] = Provenance::Observed;
              } else {
                h.y[j] = linear_predictor(d) + d.sigma * rng.normal();
                h.y_prov[j] = Provenance::Imputed;
              }
              break;
            case StepTarget::kAdherence:
              if (own) {
                iv[k] = data.i[j * periods + k];
                ip[k] = Provenance::Observed;
              } else {
                iv[k] = at_risk && rng.bernoulli(expit(linear_predictor(d))) ? 1 : 0;
                ip[k] = Provenance::Imputed;
              }
              at_risk = static_cast<unsigned char>(at_risk && iv[k]);
              break;
          }
        }
        h.a[j] = at_risk;
      }
    }
  }

 private:
  static std::size_t row_index(const Predictor& pr, std::size_t p) {
    switch (pr.kind) {
      case Predictor::Kind::kIntercept: return 0;
      case Predictor::Kind::kCovariate: return 1 + pr.index;
      case Predictor::Kind::kIntermediate: return 1 + p + pr.index;
    }
    return 0;
  }

  static FittedStep fit_step(const detail::NumericTrial& data, int t, const ImputationStep& step,
                             const LogisticOptions& logistic_options) {
    const std::size_t periods = data.periods;
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < data.n; ++j) {
      if (data.arm[j] != t) continue;
      switch (step.target) {
        case StepTarget::kIntermediate:
          if (data.z_obs[j * periods + step.period]) rows.push_back(j);
          break;
        case StepTarget::kOutcome:
          if (data.y_obs[j]) rows.push_back(j);
          break;
        case StepTarget::kAdherence:
          if (data.at_risk(j, step.period)) rows.push_back(j);
          break;
      }
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto q = static_cast<Eigen::Index>(step.predictors.size());
    if (n < 2) throw InsufficientDataError("fewer than two subjects available to fit " + step.formula());
    Eigen::MatrixXd X(n, q);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::size_t j = rows[r];
      for (Eigen::Index c = 0; c < q; ++c) {
        const auto& pr = step.predictors[c];
        switch (pr.kind) {
          case Predictor::Kind::kIntercept: X(r, c) = 1.0; break;
          case Predictor::Kind::kCovariate: X(r, c) = data.x[j * data.p + pr.index]; break;
          case Predictor::Kind::kIntermediate: X(r, c) = data.z[j * periods + pr.index]; break;
        }
      }
      switch (step.target) {
        case StepTarget::kIntermediate: y[r] = data.z[j * periods + step.period]; break;
        case StepTarget::kOutcome: y[r] = data.y[j]; break;
        case StepTarget::kAdherence: y[r] = data.i[j * periods + step.period]; break;
      }
    }

    FittedStep fs;
    fs.step = step;
    fs.n_fit = rows.size();
    fs.kept = detail::independent_columns(X);
    const Eigen::MatrixXd Xk = detail::select_columns(X, fs.kept);
    std::vector<std::string> spec;
    for (auto c : fs.kept) spec.push_back(step.predictors[c].name());

    if (step.target != StepTarget::kAdherence) {
      fs.linear = fit_linear(Xk, y, std::move(spec));
      return fs;
    }

    const bool single_class = y.minCoeff() == y.maxCoeff();
    std::optional<LogisticImputationModel> model;
    if (!single_class) {
      model = fit_logistic(Xk, y, logistic_options);
      if (model->escalated) model.reset();
    }
    if (!model) {
      Eigen::MatrixXd Xa = Xk;
      Eigen::VectorXd ya = y;
      Eigen::VectorXd wa = Eigen::VectorXd::Ones(n);
      detail::augment_logistic(Xa, ya, wa);
      model = fit_logistic(Xa, ya, wa, logistic_options);
      fs.augmented = true;
    }
    if (!model->converged) throw NotConvergedError("logistic fit did not converge for " + step.formula());
    model->predictor_spec = std::move(spec);
    model->fit_subset_rule = "arm " + std::to_string(t) + ", adherent through period " +
                             std::to_string(step.period);
    fs.logistic = std::move(model);
    return fs;
  }

  ImputationPlan plan_;
  std::array<std::vector<FittedStep>, 2> arms_;
};

/// Stream used for imputation m under root seed `seed`.
inline Stream imputation_stream(std::uint64_t seed, int m) {
  return Stream::derive(seed, {tag(StreamTag::kImpute), static_cast<std::uint64_t>(m)});
}

inline ImputedDataset impute_once(const TrialDataset& dataset, const ImputationPlan& plan, int m,
                                  Stream& rng) {
  const auto data = detail::NumericTrial::from(dataset);
  FittedImputationModel fitted(data, plan);
  ImputedDataset out;
  fitted.draw(data, m, rng, out);
  return out;
}

/// M completed datasets; imputation m uses imputation_stream(seed, m).
inline std::vector<ImputedDataset> impute_many(const TrialDataset& dataset,
                                               const ImputationPlan& plan, int M,
                                               std::uint64_t seed) {
  if (M < 1) throw Error("impute_many: M must be at least 1");
  const auto data = detail::NumericTrial::from(dataset);
  FittedImputationModel fitted(data, plan);
  std::vector<ImputedDataset> out(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    Stream rng = imputation_stream(seed, m);
    fitted.draw(data, m, rng, out[static_cast<std::size_t>(m)]);
  }
  return out;
}

/// Long-format audit export:
/// subject_id,m,t,z1..z{K-1},i1..i{K-1},a,y,provenance
/// provenance holds one letter per cell (O observed, I imputed) in the order
/// z1..z{K-1}, i1..i{K-1}, y.
inline void write_imputed_csv(std::ostream& out, const TrialDataset& dataset,
                              std::span<const ImputedDataset> imputations) {
  const std::size_t periods = dataset.periods();
  out << "subject_id,m,t";
  for (std::size_t k = 1; k <= periods; ++k) out << ",z" << k;
  for (std::size_t k = 1; k <= periods; ++k) out << ",i" << k;
  out << ",a,y,provenance\n";
  auto letter = [](Provenance p) { return p == Provenance::Observed ? 'O' : 'I'; };
  for (const auto& imp : imputations) {
    for (std::size_t j = 0; j < imp.n; ++j) {
      for (int t = 0; t < 2; ++t) {
        const auto& h = imp.under[t];
        out << dataset[imp.source[j]].subject_id << ',' << imp.m << ',' << t;
        for (std::size_t k = 0; k < periods; ++k) out << ',' << format_double(h.z[j * periods + k]);
        for (std::size_t k = 0; k < periods; ++k) out << ',' << int(h.i[j * periods + k]);
        out << ',' << int(h.a[j]) << ',' << format_double(h.y[j]) << ',';
        for (std::size_t k = 0; k < periods; ++k) out << letter(h.z_prov[j * periods + k]);
        for (std::size_t k = 0; k < periods; ++k) out << letter(h.i_prov[j * periods + k]);
        out << letter(h.y_prov[j]) << '\n';
      }
    }
  }
}

}  // namespace adace
