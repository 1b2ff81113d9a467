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
// Independent oracles and random fixtures shared by the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adace/adace.hpp"

namespace adace_test {

// ---------------------------------------------------------------------------
// Least squares by Gaussian elimination on the normal equations in long
// double. Deliberately unrelated to the QR path used by the library.

inline std::vector<long double> normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto n = X.rows();
  const auto q = X.cols();
  std::vector<std::vector<long double>> a(q, std::vector<long double>(q + 1, 0.0L));
  for (Eigen::Index r = 0; r < q; ++r) {
    for (Eigen::Index c = 0; c < q; ++c) {
      long double s = 0.0L;
      for (Eigen::Index i = 0; i < n; ++i) s += (long double)X(i, r) * (long double)X(i, c);
      a[r][c] = s;
    }
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) s += (long double)X(i, r) * (long double)y[i];
    a[r][q] = s;
  }
  for (Eigen::Index col = 0; col < q; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < q; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (Eigen::Index r = 0; r < q; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (Eigen::Index c = col; c <= q; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<long double> beta(q);
  for (Eigen::Index r = 0; r < q; ++r) beta[r] = a[r][q] / a[r][r];
  return beta;
}

// ---------------------------------------------------------------------------
// Literal transcription of the stratum-mean estimator table, one imputation.
// Each subject carries its randomized arm, observed adherence A and outcome
// Y (meaningful when A = 1), the imputed counterfactual adherence, and the
// imputed potential outcomes Y(0)^(m), Y(1)^(m).

struct CellSubject {
  int arm = 0;
  int A = 0;
  double Y = 0.0;
  int A_cf = 0;      // A_{0j}(1)^(m) for arm 0, A_{1j}(0)^(m) for arm 1
  double Y0m = 0.0;  // Y_{j}(0)^(m)
  double Y1m = 0.0;  // Y_{j}(1)^(m)
};

enum class Cell { kStarPlus, kPlusPlus };

inline double table_cell(const std::vector<CellSubject>& s, Cell ps, int T, adace::Subset subset) {
  const bool e0 = subset != adace::Subset::kE1;
  const bool e1 = subset != adace::Subset::kE0;
  double num = 0.0, den = 0.0;
  for (const auto& j : s) {
    if (j.arm == 0 && !e0) continue;
    if (j.arm == 1 && !e1) continue;
    if (ps == Cell::kStarPlus) {
      if (T == 0) {
        if (j.arm == 0) {
          num += j.A_cf * (j.A * j.Y + (1 - j.A) * j.Y0m);
          den += j.A_cf;
        } else {
          num += j.A * j.Y0m;
          den += j.A;
        }
      } else {
        if (j.arm == 0) {
          num += j.A_cf * j.Y1m;
          den += j.A_cf;
        } else {
          num += j.A * j.Y;
          den += j.A;
        }
      }
    } else {
      if (T == 0) {
        if (j.arm == 0) {
          num += j.A * j.A_cf * j.Y;
          den += j.A * j.A_cf;
        } else {
          num += j.A * j.A_cf * j.Y0m;
          den += j.A * j.A_cf;
        }
      } else {
        if (j.arm == 0) {
          num += j.A * j.A_cf * j.Y1m;
          den += j.A * j.A_cf;
        } else {
          num += j.A * j.A_cf * j.Y;
          den += j.A * j.A_cf;
        }
      }
    }
  }
  return num / den;
}

/// Completed dataset (one visit) holding the same numbers as `s`. Own-arm
/// cells hold Y when A = 1 and the own-arm imputation otherwise.
inline adace::ImputedDataset to_imputed(const std::vector<CellSubject>& s, int m) {
  adace::ImputedDataset d;
  d.m = m;
  d.resize(s.size(), 1);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const auto& c = s[j];
    d.arm[j] = c.arm;
    d.source[j] = j;
    const int own = c.arm, other = 1 - c.arm;
    d.under[own].a[j] = static_cast<unsigned char>(c.A);
    d.under[own].i[j] = static_cast<unsigned char>(c.A);
    d.under[own].y[j] = c.A ? c.Y : (own == 0 ? c.Y0m : c.Y1m);
    d.under[other].a[j] = static_cast<unsigned char>(c.A_cf);
    d.under[other].i[j] = static_cast<unsigned char>(c.A_cf);
    d.under[other].y[j] = other == 0 ? c.Y0m : c.Y1m;
    d.under[own].y_prov[j] = c.A ? adace::Provenance::Observed : adace::Provenance::Imputed;
    d.under[other].y_prov[j] = adace::Provenance::Imputed;
  }
  return d;
}

/// Random 5-subject fixture with both arms present.
inline std::vector<CellSubject> random_cell_fixture(std::mt19937_64& g, std::size_t n = 5) {
  std::uniform_int_distribution<int> bit(0, 1);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::vector<CellSubject> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j].arm = j < 2 ? static_cast<int>(j) : bit(g);
    s[j].A = bit(g);
    s[j].Y = nd(g);
    s[j].A_cf = bit(g);
    s[j].Y0m = nd(g);
    s[j].Y1m = nd(g);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Random valid trial datasets (structural missingness respected).

struct DatasetShape {
  std::size_t p = 1;
  std::size_t K = 4;
  std::size_t n0 = 20;
  std::size_t n1 = 20;
};

inline DatasetShape random_shape(std::mt19937_64& g) {
  DatasetShape s;
  s.p = std::uniform_int_distribution<std::size_t>(1, 3)(g);
  s.K = std::uniform_int_distribution<std::size_t>(2, 5)(g);
  s.n0 = std::uniform_int_distribution<std::size_t>(12, 40)(g);
  s.n1 = std::uniform_int_distribution<std::size_t>(12, 40)(g);
  return s;
}

/// Data from a small linear/logistic chain so that every model is estimable.
/// `round` quantizes values to exercise exact CSV round trips of short
/// decimals as well as full-precision doubles.
inline adace::TrialDataset random_dataset(std::mt19937_64& g, const DatasetShape& s,
                                          bool round = false) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t periods = s.K - 1;
  auto q = [&](double v) { return round ? std::round(v * 1000.0) / 1000.0 : v; };
  std::vector<adace::SubjectRecord> recs;
  for (std::size_t j = 0; j < s.n0 + s.n1; ++j) {
    adace::SubjectRecord r;
    r.subject_id = "P" + std::to_string(j);
    r.arm = j < s.n0 ? 0 : 1;
    double lin = 0.0;
    for (std::size_t c = 0; c < s.p; ++c) {
      const double x = q(nd(g));
      r.x.push_back(x);
      lin += 0.5 * x;
    }
    bool at_risk = true;
    double ysum = lin;
    for (std::size_t k = 0; k < periods; ++k) {
      const double z = q(lin - 0.3 * r.arm + 0.2 * double(k) + 0.6 * nd(g));
      ysum += 0.4 * z;
      r.z.push_back(at_risk ? std::optional<double>(z) : std::nullopt);
      if (at_risk) {
        const bool stay = u(g) < adace::expit(2.0 + 0.5 * z);
        r.i_flags.push_back(stay ? 1 : 0);
        at_risk = stay;
      } else {
        r.i_flags.push_back(0);
      }
    }
    if (at_risk) r.y = q(ysum + 0.5 * r.arm + 0.5 * nd(g));
    recs.push_back(std::move(r));
  }
  return adace::TrialDataset(std::move(recs), s.p, s.K);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

}  // namespace adace_test
