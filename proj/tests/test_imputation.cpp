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
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "adace/adace.hpp"
#include "support/fixtures.hpp"

namespace {

using adace::ImputationPlan;
using adace::ImputedDataset;
using adace::PlanMode;
using adace::Provenance;

TEST(Plan, FullChainOrderAndFormulas) {
  const auto plan = ImputationPlan::make(PlanMode::kFull, 1, 4);
  std::vector<std::string> f;
  for (const auto& s : plan.steps) f.push_back(s.formula());
  const std::vector<std::string> expected{
      "z1 ~ 1 + x1",          "z2 ~ 1 + x1 + z1",      "z3 ~ 1 + x1 + z1 + z2",
      "y ~ 1 + x1 + z1 + z2 + z3", "i1 ~ 1 + x1 + z1", "i2 ~ 1 + x1 + z2",
      "i3 ~ 1 + x1 + z3"};
  EXPECT_EQ(f, expected);
  EXPECT_TRUE(plan.is_topologically_ordered());
}

TEST(Plan, BaselineOnlyStripsIntermediates) {
  const auto plan = ImputationPlan::make(PlanMode::kBaselineOnly, 2, 3);
  for (const auto& s : plan.steps) {
    for (const auto& p : s.predictors) EXPECT_NE(p.kind, adace::Predictor::Kind::kIntermediate);
    EXPECT_EQ(s.predictors.size(), 3u);
  }
  EXPECT_TRUE(plan.is_topologically_ordered());
}

TEST(Plan, OutOfOrderPlanIsRejected) {
  auto plan = ImputationPlan::make(PlanMode::kFull, 1, 4);
  std::swap(plan.steps[0], plan.steps[1]);
  EXPECT_FALSE(plan.is_topologically_ordered());
  std::mt19937_64 g(1);
  const auto ds = adace_test::random_dataset(g, {1, 4, 20, 20});
  EXPECT_THROW(adace::FittedImputationModel(adace::detail::NumericTrial::from(ds), plan), adace::Error);
}

adace::TrialDataset constant_arms() {
  std::vector<adace::SubjectRecord> recs;
  for (int j = 0; j < 10; ++j) {
    adace::SubjectRecord r;
    r.subject_id = "C" + std::to_string(j);
    r.arm = j < 5 ? 0 : 1;
    r.x = {8.0};
    if (r.arm == 0) {
      r.z = {0.1, 0.2, 0.3};
      r.y = 0.5;
    } else {
      r.z = {-0.5, -1.0, -1.3};
      r.y = -1.57;
    }
    r.i_flags = {1, 1, 1};
    recs.push_back(r);
  }
  return adace::TrialDataset(recs, 1, 4);
}

TEST(Impute, ZeroNoiseCascadesToConstants) {
  const auto ds = constant_arms();
  const auto imps = adace::impute_many(ds, ImputationPlan::make(PlanMode::kFull, 1, 4), 5, 3);
  for (const auto& d : imps) {
    for (std::size_t j = 0; j < d.n; ++j) {
      // residuals round to ~1e-32 rather than exactly zero
      EXPECT_NEAR(d.under[0].y[j], 0.5, 1e-12);
      EXPECT_NEAR(d.under[1].y[j], -1.57, 1e-12);
      EXPECT_NEAR(d.under[1].z[j * 3 + 2], -1.3, 1e-12);
    }
  }
}

TEST(Impute, BaselineOnlyIgnoresIntermediates) {
  auto cfg = adace::SettingConfig::setting1();
  cfg.n_per_arm = 2000;
  const auto trial = adace::generate_trial(cfg, 5);
  const auto& ds = trial.dataset;
  for (auto mode : {PlanMode::kBaselineOnly, PlanMode::kFull}) {
    const auto plan = ImputationPlan::make(mode, 1, 4);
    const auto d = adace::impute_many(ds, plan, 1, 9).front();
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < d.n; ++j)
      if (d.arm[j] == 0) rows.push_back(j);
    Eigen::MatrixXd X(rows.size(), 5);
    Eigen::VectorXd y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto j = rows[r];
      X(r, 0) = 1.0;
      X(r, 1) = *ds[d.source[j]].x[0];
      for (int k = 0; k < 3; ++k) X(r, 2 + k) = d.under[1].z[j * 3 + k];
      y[r] = d.under[1].y[j];
    }
    const auto fit = adace::fit_linear(X, y);
    for (int k = 0; k < 3; ++k) {
      const double se = std::sqrt(fit.s2_hat * fit.xtx_inv(2 + k, 2 + k));
      if (mode == PlanMode::kBaselineOnly) {
        EXPECT_LT(std::fabs(fit.coef_hat[2 + k]), 4.0 * se) << "z" << k + 1;
      } else {
        EXPECT_NEAR(fit.coef_hat[2 + k], cfg.beta3[k], 0.15) << "z" << k + 1;
      }
    }
  }
}

TEST(Impute, ArmSwapExchangeability) {
  // Subject j in arm 0 of D and the same subject in arm 1 of the mirrored
  // dataset have identically distributed imputed counterfactuals.
  auto cfg = adace::SettingConfig::setting1();
  cfg.n_per_arm = 60;
  const auto ds = adace::generate_trial(cfg, 21).dataset;
  std::vector<adace::SubjectRecord> mirrored = ds.records();
  for (auto& r : mirrored) r.arm = 1 - r.arm;
  const adace::TrialDataset dm(mirrored, ds.p(), ds.K());
  const auto plan = ImputationPlan::make(PlanMode::kFull, 1, 4);
  const auto a = adace::detail::NumericTrial::from(ds);
  const auto b = adace::detail::NumericTrial::from(dm);
  adace::FittedImputationModel fa(a, plan), fb(b, plan);
  const int M = 10000;
  const std::size_t j = 0;  // arm 0 in ds, arm 1 in dm
  std::vector<double> ya, yb;
  ImputedDataset out;
  bool differ = false;
  for (int m = 0; m < M; ++m) {
    auto ra = adace::imputation_stream(1, m);
    fa.draw(a, m, ra, out);
    ya.push_back(out.under[1].y[j]);
    auto rb = adace::imputation_stream(2, m);
    fb.draw(b, m, rb, out);
    yb.push_back(out.under[0].y[j]);
    differ = differ || ya.back() != yb.back();
  }
  EXPECT_TRUE(differ);
  const double se = std::sqrt((std::pow(adace_test::sample_sd(ya), 2) + std::pow(adace_test::sample_sd(yb), 2)) / M);
  EXPECT_LT(std::fabs(adace_test::sample_mean(ya) - adace_test::sample_mean(yb)), 3.0 * se);
}

TEST(Impute, SelfConsistentAtTruth) {
  auto cfg = adace::SettingConfig::setting1();
  cfg.n_per_arm = 5000;
  const auto ds = adace::generate_trial(cfg, 33).dataset;
  const auto plan = ImputationPlan::make(PlanMode::kFull, 1, 4);
  const auto data = adace::detail::NumericTrial::from(ds);
  adace::FittedImputationModel fitted(data, plan);
  auto conditional_mean = [&](double x, int t) {
    double y = cfg.beta0 + cfg.beta1 * x + cfg.beta2 * t;
    for (int k = 0; k < 3; ++k) y += cfg.beta3[k] * (cfg.alpha0[k] + cfg.alpha1[k] * x + cfg.alpha2[k] * t);
    return y;
  };
  for (int t = 0; t < 2; ++t) {
    // subjects randomized to 1 - t: their Y(t) is fully imputed
    double truth = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < ds.size(); ++j) {
      if (ds[j].arm != 1 - t) continue;
      truth += conditional_mean(*ds[j].x[0], t);
      ++count;
    }
    truth /= double(count);
    const int M = 20;
    std::vector<double> means;
    ImputedDataset out;
    for (int m = 0; m < M; ++m) {
      auto rng = adace::imputation_stream(7, m);
      fitted.draw(data, m, rng, out);
      double s = 0.0;
      for (std::size_t j = 0; j < out.n; ++j)
        if (out.arm[j] == 1 - t) s += out.under[t].y[j];
      means.push_back(s / double(count));
    }
    const double b = std::pow(adace_test::sample_sd(means), 2);
    const double se = std::sqrt(b * (1.0 + 1.0 / M));
    EXPECT_LT(std::fabs(adace_test::sample_mean(means) - truth), 3.0 * se) << "t=" << t;
  }
}

TEST(ImputeMany, SingleImputation) {
  std::mt19937_64 g(4);
  const auto ds = adace_test::random_dataset(g, {1, 4, 25, 25});
  const auto imps = adace::impute_many(ds, ImputationPlan::make(PlanMode::kFull, 1, 4), 1, 8);
  ASSERT_EQ(imps.size(), 1u);
  EXPECT_EQ(imps[0].m, 0);
  EXPECT_EQ(imps[0].n, ds.size());
}

bool same_cells(const ImputedDataset& a, const ImputedDataset& b) {
  for (int t = 0; t < 2; ++t)
    if (a.under[t].z != b.under[t].z || a.under[t].i != b.under[t].i || a.under[t].y != b.under[t].y ||
        a.under[t].a != b.under[t].a)
      return false;
  return true;
}

TEST(ImputeMany, SeedDeterminesOutput) {
  std::mt19937_64 g(5);
  const auto ds = adace_test::random_dataset(g, {2, 3, 30, 25});
  const auto plan = ImputationPlan::make(PlanMode::kFull, 2, 3);
  const auto a = adace::impute_many(ds, plan, 4, 100);
  const auto b = adace::impute_many(ds, plan, 4, 100);
  const auto c = adace::impute_many(ds, plan, 4, 101);
  for (int m = 0; m < 4; ++m) {
    EXPECT_TRUE(same_cells(a[m], b[m]));
    EXPECT_FALSE(same_cells(a[m], c[m]));
    for (std::size_t j = 0; j < ds.size(); ++j) {
      const int t = ds[j].arm;
      EXPECT_EQ(a[m].under[t].z[j * 2], c[m].under[t].z[j * 2]);
      if (ds[j].y) {
        EXPECT_EQ(a[m].under[t].y[j], c[m].under[t].y[j]);
      }
    }
  }
}

TEST(Impute, PlugInLogisticSwitch) {
  std::mt19937_64 g(6);
  const auto ds = adace_test::random_dataset(g, {1, 4, 40, 40});
  auto plan = ImputationPlan::make(PlanMode::kFull, 1, 4);
  const auto drawn = adace::impute_many(ds, plan, 3, 5);
  plan.draw_logistic_params = false;
  const auto plug = adace::impute_many(ds, plan, 3, 5);
  const auto plug2 = adace::impute_many(ds, plan, 3, 5);
  EXPECT_TRUE(same_cells(plug[0], plug2[0]));
  bool any_diff = false;
  for (int m = 0; m < 3; ++m) any_diff = any_diff || !same_cells(drawn[m], plug[m]);
  EXPECT_TRUE(any_diff);
}

TEST(Impute, FitErrorsNameArmAndStep) {
  std::vector<adace::SubjectRecord> recs;
  for (int j = 0; j < 8; ++j) {
    adace::SubjectRecord r;
    r.subject_id = "F" + std::to_string(j);
    r.arm = j < 4 ? 0 : 1;
    r.x = {double(j)};
    r.z = {0.1 * j};
    // arm 1 has a single adherer, so Y cannot be fitted there
    const bool adherent = r.arm == 0 || j == 4;
    r.i_flags = {adherent ? 1 : 0};
    if (adherent) r.y = 0.3 * j;
    recs.push_back(r);
  }
  recs[1].i_flags = {0};
  recs[1].y.reset();
  const adace::TrialDataset ds(recs, 1, 2);
  try {
    adace::impute_many(ds, ImputationPlan::make(PlanMode::kFull, 1, 2), 1, 1);
    FAIL();
  } catch (const adace::FitError& e) {
    EXPECT_EQ(e.arm(), 1);
    EXPECT_EQ(e.step(), "y");
  }
}

TEST(Impute, RejectsInvalidDataset) {
  auto recs = constant_arms().records();
  recs[0].i_flags = {0, 1, 1};
  EXPECT_THROW(adace::impute_many(adace::TrialDataset(recs, 1, 4),
                                  ImputationPlan::make(PlanMode::kFull, 1, 4), 1, 1),
               adace::Error);
}

// Observed cells untouched, every cell populated, imputed adherence monotone.
void check_invariants(const adace::TrialDataset& ds, const ImputedDataset& d) {
  const std::size_t P = ds.periods();
  ASSERT_EQ(d.n, ds.size());
  for (std::size_t j = 0; j < d.n; ++j) {
    const auto& r = ds[d.source[j]];
    ASSERT_EQ(d.arm[j], r.arm);
    for (int t = 0; t < 2; ++t) {
      const auto& h = d.under[t];
      const bool own = t == r.arm;
      int prod = 1;
      bool dropped = false;
      for (std::size_t k = 0; k < P; ++k) {
        const double z = h.z[j * P + k];
        ASSERT_TRUE(std::isfinite(z));
        if (own && r.z[k]) {
          ASSERT_EQ(z, *r.z[k]);
          ASSERT_EQ(h.z_prov[j * P + k], Provenance::Observed);
        } else {
          ASSERT_EQ(h.z_prov[j * P + k], Provenance::Imputed);
        }
        const int ik = h.i[j * P + k];
        ASSERT_TRUE(ik == 0 || ik == 1);
        if (own) {
          ASSERT_EQ(ik, r.i_flags[k].value_or(0));
          ASSERT_EQ(h.i_prov[j * P + k], Provenance::Observed);
        } else {
          ASSERT_EQ(h.i_prov[j * P + k], Provenance::Imputed);
        }
        if (dropped) {
          ASSERT_EQ(ik, 0);
        }
        dropped = dropped || ik == 0;
        prod *= ik;
      }
      ASSERT_EQ(int(h.a[j]), prod);
      ASSERT_TRUE(std::isfinite(h.y[j]));
      if (own && r.y) {
        ASSERT_EQ(h.y[j], *r.y);
        ASSERT_EQ(h.y_prov[j], Provenance::Observed);
      } else {
        ASSERT_EQ(h.y_prov[j], Provenance::Imputed);
      }
    }
  }
}

TEST(ImputeProperty, InvariantsOverRandomFixtures) {
  std::mt19937_64 g(20260607);
  int tested = 0, attempts = 0;
  while (tested < 1000) {
    ++attempts;
    ASSERT_LT(attempts, 1100) << "too many unfittable fixtures";
    const auto shape = adace_test::random_shape(g);
    const auto ds = adace_test::random_dataset(g, shape);
    const auto mode = tested % 4 == 3 ? PlanMode::kBaselineOnly : PlanMode::kFull;
    std::vector<ImputedDataset> imps;
    try {
      imps = adace::impute_many(ds, ImputationPlan::make(mode, shape.p, shape.K), 2, tested);
    } catch (const adace::FitError&) {
      continue;
    }
    for (const auto& d : imps) check_invariants(ds, d);
    if (HasFatalFailure()) return;
    ++tested;
  }
}

TEST(ImputedCsv, HeaderAndProvenance) {
  std::vector<adace::SubjectRecord> recs = constant_arms().records();
  const adace::TrialDataset ds(recs, 1, 4);
  const auto imps = adace::impute_many(ds, ImputationPlan::make(PlanMode::kFull, 1, 4), 2, 1);
  std::ostringstream out;
  adace::write_imputed_csv(out, ds, imps);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "subject_id,m,t,z1,z2,z3,i1,i2,i3,a,y,provenance");
  std::getline(in, line);
  EXPECT_EQ(line, "C0,0,0,0.1,0.2,0.3,1,1,1,1,0.5,OOOOOOO");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 7), "C0,0,1,");
  EXPECT_EQ(line.substr(line.size() - 7), "IIIIIII");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows + 2, 2u * 2u * ds.size());
}

}  // namespace
