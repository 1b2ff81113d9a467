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

// Regression models used by the imputation steps, with the sufficient
// statistics needed for proper (parameter-drawing) multiple imputation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "adace/common.hpp"
#include "adace/rng.hpp"

namespace adace {

class SingularDesignError : public Error {
 public:
  using Error::Error;
};
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};
class SeparationError : public Error {
 public:
  using Error::Error;
};
class NotConvergedError : public Error {
 public:
  using Error::Error;
};

namespace detail {

/// Symmetric square root factor L with L L' = S; tolerates PSD input.
inline Eigen::MatrixXd sqrt_factor(const Eigen::MatrixXd& S) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace detail

struct LinearImputationModel {
  Eigen::VectorXd coef_hat;
  Eigen::MatrixXd xtx_inv;
  double s2_hat = 0.0;
  int df = 0;
  std::vector<std::string> predictor_spec;
  Eigen::MatrixXd xtx_inv_factor;  ///< cached Cholesky factor of xtx_inv
};

struct LinearDraw {
  Eigen::VectorXd coef;
  double sigma = 0.0;
};

/// Ordinary least squares. Throws InsufficientDataError when n <= q and
/// SingularDesignError when the design is rank deficient.
inline LinearImputationModel fit_linear(const Eigen::MatrixXd& design,
                                        const Eigen::VectorXd& response,
                                        std::vector<std::string> predictor_spec = {}) {
  const auto n = design.rows();
  const auto q = design.cols();
  if (response.size() != n) throw Error("fit_linear: design/response size mismatch");
  if (n <= q)
    throw InsufficientDataError("fit_linear: need more rows than columns (n=" +
                                std::to_string(n) + ", q=" + std::to_string(q) + ")");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < q) throw SingularDesignError("fit_linear: design is rank deficient");

  LinearImputationModel m;
  m.coef_hat = qr.solve(response);
  const Eigen::VectorXd resid = response - design * m.coef_hat;
  m.df = static_cast<int>(n - q);
  m.s2_hat = resid.squaredNorm() / m.df;

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd R =
      qr.matrixR().topLeftCorner(q, q).template triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.template triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(q, q));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  m.xtx_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  m.xtx_inv = 0.5 * (m.xtx_inv + m.xtx_inv.transpose());
  m.xtx_inv_factor = detail::sqrt_factor(m.xtx_inv);
  m.predictor_spec = std::move(predictor_spec);
  return m;
}

/// Normal / scaled-inverse-chi-square posterior draw:
///   sigma*^2 = s2_hat * df / g,  g ~ chi2(df)
///   coef*    ~ N(coef_hat, sigma*^2 (X'X)^-1)
inline LinearDraw draw_linear(const LinearImputationModel& model, Stream& rng) {
  if (model.df < 1) throw Error("draw_linear: model has no residual degrees of freedom");
  const auto q = model.coef_hat.size();
  const Eigen::MatrixXd factor = model.xtx_inv_factor.rows() == q
                                     ? model.xtx_inv_factor
                                     : detail::sqrt_factor(model.xtx_inv);
  const double g = rng.chi_squared(model.df);
  LinearDraw d;
  d.sigma = std::sqrt(model.s2_hat * model.df / g);
  Eigen::VectorXd e(q);
  for (Eigen::Index j = 0; j < q; ++j) e[j] = rng.normal();
  d.coef = model.coef_hat + d.sigma * (factor * e);
  return d;
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticOptions {
  double penalty = 1e-6;
  double escalated_penalty = 1e-2;
  int max_iter = 100;
  double tol = 1e-8;
  /// |linear predictor| beyond this at the optimum is treated as separation.
  double separation_eta = 15.0;
};

struct LogisticImputationModel {
  Eigen::VectorXd coef_hat;
  Eigen::MatrixXd cov_hat;
  std::vector<std::string> predictor_spec;
  bool converged = false;
  std::string fit_subset_rule;
  double penalty = 0.0;
  bool escalated = false;  ///< separation detected; refit with the larger penalty
  int iterations = 0;
  Eigen::MatrixXd cov_factor;
};

namespace detail {

struct IrlsResult {
  Eigen::VectorXd beta;
  Eigen::MatrixXd information;
  bool converged = false;
  int iterations = 0;
  double max_abs_eta = 0.0;
};

inline double penalized_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                               double lambda) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + e^eta) computed stably
    const double e = eta[i];
    const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += w[i] * (y[i] * e - log1pexp);
  }
  return ll - 0.5 * lambda * beta.squaredNorm();
}

inline IrlsResult irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double lambda, const LogisticOptions& opt) {
  const auto n = X.rows();
  const auto q = X.cols();
  IrlsResult r;
  r.beta = Eigen::VectorXd::Zero(q);
  double ll = penalized_loglik(X, y, w, r.beta, lambda);
  Eigen::VectorXd p(n), score(q);
  Eigen::MatrixXd H(q, q);
  for (int it = 0; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd eta = X * r.beta;
    Eigen::VectorXd wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = expit(eta[i]);
      wt[i] = w[i] * p[i] * (1.0 - p[i]);
    }
    score = X.transpose() * (w.cwiseProduct(y - p)) - lambda * r.beta;
    H = X.transpose() * wt.asDiagonal() * X;
    H.diagonal().array() += lambda;
    r.iterations = it;
    r.max_abs_eta = eta.cwiseAbs().maxCoeff();
    if (score.cwiseAbs().maxCoeff() < opt.tol) {
      r.converged = true;
      break;
    }
    if (it == opt.max_iter) break;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = ldlt.solve(score);
    if (!step.allFinite()) break;
    // Step halving keeps the penalized likelihood monotone.
    double scale = 1.0;
    Eigen::VectorXd cand;
    double cand_ll = ll;
    for (int h = 0; h < 30; ++h) {
      cand = r.beta + scale * step;
      cand_ll = penalized_loglik(X, y, w, cand, lambda);
      if (cand_ll >= ll - 1e-12 * std::abs(ll)) break;
      scale *= 0.5;
    }
    r.beta = cand;
    ll = cand_ll;
  }
  r.information = H;
  return r;
}

}  // namespace detail

/// Penalized (ridge) maximum likelihood via IRLS. The penalty starts at
/// options.penalty and escalates once to options.escalated_penalty when the
/// fit shows separation. cov_hat is the inverse penalized information.
inline LogisticImputationModel fit_logistic(const Eigen::MatrixXd& design,
                                            const Eigen::VectorXd& response,
                                            const Eigen::VectorXd& weights,
                                            const LogisticOptions& opt = {}) {
  const auto n = design.rows();
  if (response.size() != n || weights.size() != n)
    throw Error("fit_logistic: design/response/weights size mismatch");
  if (n == 0) throw InsufficientDataError("fit_logistic: no rows");
  double w0 = 0.0, w1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (response[i] != 0.0 && response[i] != 1.0)
      throw Error("fit_logistic: response must be 0/1");
    (response[i] == 1.0 ? w1 : w0) += weights[i];
  }
  if (w0 <= 0.0 || w1 <= 0.0)
    throw SeparationError("fit_logistic: response has a single class");

  LogisticImputationModel m;
  m.penalty = opt.penalty;
  auto r = detail::irls(design, response, weights, opt.penalty, opt);
  if (!r.converged || r.max_abs_eta > opt.separation_eta) {
    m.escalated = true;
    m.penalty = opt.escalated_penalty;
    r = detail::irls(design, response, weights, opt.escalated_penalty, opt);
  }
  m.coef_hat = r.beta;
  m.converged = r.converged && r.beta.allFinite();
  m.iterations = r.iterations;
  m.cov_hat = r.information.ldlt().solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
  m.cov_hat = 0.5 * (m.cov_hat + m.cov_hat.transpose());
  m.cov_factor = detail::sqrt_factor(m.cov_hat);
  return m;
}

inline LogisticImputationModel fit_logistic(const Eigen::MatrixXd& design,
                                            const Eigen::VectorXd& response,
                                            const LogisticOptions& opt = {}) {
  return fit_logistic(design, response, Eigen::VectorXd::Ones(design.rows()), opt);
}

/// Normal approximation to the posterior at the (penalized) MLE.
inline Eigen::VectorXd draw_logistic(const LogisticImputationModel& model, Stream& rng) {
  if (!model.converged) throw NotConvergedError("draw_logistic: model did not converge");
  const auto q = model.coef_hat.size();
  const Eigen::MatrixXd factor =
      model.cov_factor.rows() == q ? model.cov_factor : detail::sqrt_factor(model.cov_hat);
  Eigen::VectorXd e(q);
  for (Eigen::Index j = 0; j < q; ++j) e[j] = rng.normal();
  return model.coef_hat + factor * e;
}

}  // namespace adace
