#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "dqm/error.hpp"
#include "dqm/stats.hpp"
#include "dqm/structure_metrics.hpp"

namespace dqm {

namespace {

struct Pattern {
  std::vector<int> observed;
  std::vector<int> missing;
  std::vector<std::size_t> rows;
};

Eigen::MatrixXd sub(const Eigen::MatrixXd& m, const std::vector<int>& r, const std::vector<int>& c) {
  Eigen::MatrixXd out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = m(r[i], c[j]);
  return out;
}

Eigen::VectorXd sub(const Eigen::VectorXd& v, const std::vector<int>& r) {
  Eigen::VectorXd out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out(i) = v(r[i]);
  return out;
}

// Inverse of a symmetric block; adds a small ridge when it is not positive definite.
Eigen::MatrixXd safe_inverse(Eigen::MatrixXd a, bool& ridged) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    ridged = true;
    a += 1e-8 * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    llt.compute(a);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::insufficient_data, "Little's test: covariance is singular even after ridge");
  }
  return llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace

LittlesResult littles_mcar_test(const std::vector<std::vector<double>>& data, const LittlesOptions& opts) {
  if (data.empty()) throw Error(ErrorKind::insufficient_data, "Little's test: no records");
  const std::size_t p = data.front().size();
  if (p < 2) throw Error(ErrorKind::prerequisite, "Little's test needs at least 2 numerical columns");
  LittlesResult out;

  std::map<std::vector<bool>, Pattern> by_mask;
  std::size_t all_missing = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != p) throw Error(ErrorKind::invalid_argument, "Little's test: ragged rows");
    std::vector<bool> mask(p);
    std::size_t nobs = 0;
    for (std::size_t j = 0; j < p; ++j) {
      mask[j] = std::isfinite(data[i][j]);
      nobs += mask[j];
    }
    if (nobs == 0) {
      ++all_missing;
      continue;
    }
    auto& pat = by_mask[mask];
    if (pat.rows.empty()) {
      for (std::size_t j = 0; j < p; ++j) (mask[j] ? pat.observed : pat.missing).push_back(static_cast<int>(j));
    }
    pat.rows.push_back(i);
  }
  if (all_missing > 0)
    out.warnings.push_back(std::to_string(all_missing) + " record(s) with every variable missing excluded");
  if (by_mask.size() < 2) {
    if (by_mask.size() == 1 && by_mask.begin()->second.missing.empty())
      throw Error(ErrorKind::prerequisite, "Little's test: no missingness (complete data)");
    throw Error(ErrorKind::prerequisite, "Little's test needs at least 2 distinct missingness patterns");
  }
  std::vector<Pattern> patterns;
  for (auto& [mask, pat] : by_mask) patterns.push_back(std::move(pat));
  out.patterns = patterns.size();

  // Available-case starting values.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> col;
    for (const auto& row : data)
      if (std::isfinite(row[j])) col.push_back(row[j]);
    if (col.size() < 2) throw Error(ErrorKind::insufficient_data, "Little's test: a column has fewer than 2 values");
    mu(j) = stats::mean(col);
    sigma(j, j) = stats::variance(col, 0);
    if (!(sigma(j, j) > 0.0)) throw Error(ErrorKind::insufficient_data, "Little's test: a column is constant");
  }

  double n = 0.0;
  for (const auto& pat : patterns) n += static_cast<double>(pat.rows.size());
  bool ridged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::VectorXd t1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(p, p);
    for (const auto& pat : patterns) {
      Eigen::MatrixXd reg;
      Eigen::MatrixXd cond;
      if (!pat.missing.empty()) {
        const Eigen::MatrixXd soo_inv = safe_inverse(sub(sigma, pat.observed, pat.observed), ridged);
        reg = sub(sigma, pat.missing, pat.observed) * soo_inv;
        cond = sub(sigma, pat.missing, pat.missing) - reg * sub(sigma, pat.observed, pat.missing);
      }
      for (std::size_t r : pat.rows) {
        Eigen::VectorXd x(p);
        Eigen::VectorXd xo(pat.observed.size());
        for (std::size_t k = 0; k < pat.observed.size(); ++k) x(pat.observed[k]) = xo(k) = data[r][pat.observed[k]];
        if (!pat.missing.empty()) {
          const Eigen::VectorXd xm = sub(mu, pat.missing) + reg * (xo - sub(mu, pat.observed));
          for (std::size_t k = 0; k < pat.missing.size(); ++k) x(pat.missing[k]) = xm(k);
        }
        t1 += x;
        t2 += x * x.transpose();
        for (std::size_t a = 0; a < pat.missing.size(); ++a)
          for (std::size_t b = 0; b < pat.missing.size(); ++b) t2(pat.missing[a], pat.missing[b]) += cond(a, b);
      }
    }
    const Eigen::VectorXd mu_new = t1 / n;
    const Eigen::MatrixXd sigma_new = t2 / n - mu_new * mu_new.transpose();
    // Change measured in units of the current scale, so the stopping rule is affine invariant.
    double change = 0.0;
    for (std::size_t a = 0; a < p; ++a) {
      const double sa = std::sqrt(sigma(a, a));
      change = std::max(change, std::abs(mu_new(a) - mu(a)) / sa);
      for (std::size_t b = 0; b < p; ++b)
        change = std::max(change, std::abs(sigma_new(a, b) - sigma(a, b)) / (sa * std::sqrt(sigma(b, b))));
    }
    mu = mu_new;
    sigma = sigma_new;
    out.iterations = static_cast<std::size_t>(it);
    if (change < opts.tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged)
    out.warnings.push_back("EM did not converge within " + std::to_string(opts.max_iter) + " iterations");

  double d2 = 0.0, df = 0.0;
  for (const auto& pat : patterns) {
    const Eigen::MatrixXd inv = safe_inverse(sub(sigma, pat.observed, pat.observed), ridged);
    Eigen::VectorXd ybar = Eigen::VectorXd::Zero(pat.observed.size());
    for (std::size_t r : pat.rows)
      for (std::size_t k = 0; k < pat.observed.size(); ++k) ybar(k) += data[r][pat.observed[k]];
    ybar /= static_cast<double>(pat.rows.size());
    const Eigen::VectorXd diff = ybar - sub(mu, pat.observed);
    d2 += static_cast<double>(pat.rows.size()) * diff.dot(inv * diff);
    df += static_cast<double>(pat.observed.size());
  }
  df -= static_cast<double>(p);
  if (ridged) out.warnings.push_back("singular pattern covariance: ridge 1e-8 added");
  if (!(df > 0.0)) throw Error(ErrorKind::insufficient_data, "Little's test: zero degrees of freedom");
  out.d2 = d2;
  out.df = df;
  out.p_value = stats::chi2_sf(d2, df);
  return out;
}

}  // namespace dqm
