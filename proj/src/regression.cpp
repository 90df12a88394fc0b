#include "datamap/regression.hpp"

#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

void seeded_shuffle(std::vector<std::size_t>& indices, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = indices.size(); i > 1; --i)
    std::swap(indices[i - 1], indices[rng.next() % i]);
}

namespace {

// Householder QR with column pivoting on a copy of A. Reflectors stay in the
// lower triangle (v, with v[0] implied 1 and beta stored separately); R sits
// in the upper triangle. pivot[j] is the source column of output column j.
struct Cpqr {
  Matrix a;
  std::vector<double> beta;
  std::vector<std::size_t> pivot;
  std::size_t rank = 0;
};

Cpqr cpqr(const Matrix& input) {
  Cpqr qr{input, {}, {}, 0};
  Matrix& a = qr.a;
  std::size_t m = a.rows, n = a.cols;
  qr.beta.assign(n, 0.0);
  qr.pivot.resize(n);
  for (std::size_t j = 0; j < n; ++j) qr.pivot[j] = j;

  std::size_t steps = std::min(m, n);
  double max_diag = 0.0;
  std::vector<double> col_norm2(n, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    // Exact remaining column norms (cheap at these sizes, no downdating
    // drift). Pivot the largest to position k.
    for (std::size_t j = k; j < n; ++j) {
      col_norm2[j] = 0.0;
      for (std::size_t i = k; i < m; ++i) col_norm2[j] += a.at(i, j) * a.at(i, j);
    }
    std::size_t best = k;
    for (std::size_t j = k + 1; j < n; ++j)
      if (col_norm2[j] > col_norm2[best]) best = j;
    if (best != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(a.at(i, k), a.at(i, best));
      std::swap(qr.pivot[k], qr.pivot[best]);
    }

    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) norm2 += a.at(i, k) * a.at(i, k);
    double norm = std::sqrt(norm2);
    if (norm == 0.0) {
      qr.beta[k] = 0.0;
      continue;
    }
    double alpha = a.at(k, k) >= 0 ? -norm : norm;
    double v0 = a.at(k, k) - alpha;
    a.at(k, k) = alpha;
    // Normalize so v[0] == 1.
    for (std::size_t i = k + 1; i < m; ++i) a.at(i, k) /= v0;
    qr.beta[k] = -v0 / alpha;

    // Apply the reflector to the trailing columns; v lives below the
    // diagonal with v[0] == 1 implied.
    for (std::size_t j = k + 1; j < n; ++j) {
      double dot = a.at(k, j);
      for (std::size_t i = k + 1; i < m; ++i) dot += a.at(i, k) * a.at(i, j);
      double scale = qr.beta[k] * dot;
      a.at(k, j) -= scale;
      for (std::size_t i = k + 1; i < m; ++i) a.at(i, j) -= a.at(i, k) * scale;
    }
    max_diag = std::max(max_diag, std::abs(a.at(k, k)));
  }

  double tol = max_diag * static_cast<double>(std::max(m, n)) *
               std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k < steps; ++k)
    if (std::abs(a.at(k, k)) > tol) ++qr.rank;
  return qr;
}

// Q^T b using the reflectors of a CPQR.
std::vector<double> apply_qt(const Cpqr& qr, std::span<const double> b) {
  std::vector<double> out(b.begin(), b.end());
  std::size_t m = qr.a.rows, n = qr.a.cols;
  std::size_t steps = std::min(m, n);
  for (std::size_t k = 0; k < steps; ++k) {
    if (qr.beta[k] == 0.0) continue;
    double dot = out[k];
    for (std::size_t i = k + 1; i < m; ++i) dot += qr.a.at(i, k) * out[i];
    double scale = qr.beta[k] * dot;
    out[k] -= scale;
    for (std::size_t i = k + 1; i < m; ++i) out[i] -= qr.a.at(i, k) * scale;
  }
  return out;
}

// Plain (unpivoted) Householder QR for the transpose trick in the
// rank-deficient path; m >= n assumed.
struct PlainQr {
  Matrix a;
  std::vector<double> beta;
};

PlainQr plain_qr(const Matrix& input) {
  PlainQr qr{input, {}};
  Matrix& a = qr.a;
  std::size_t m = a.rows, n = a.cols;
  qr.beta.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) norm2 += a.at(i, k) * a.at(i, k);
    double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    double alpha = a.at(k, k) >= 0 ? -norm : norm;
    double v0 = a.at(k, k) - alpha;
    a.at(k, k) = alpha;
    for (std::size_t i = k + 1; i < m; ++i) a.at(i, k) /= v0;
    qr.beta[k] = -v0 / alpha;
    for (std::size_t j = k + 1; j < n; ++j) {
      double dot = a.at(k, j);
      for (std::size_t i = k + 1; i < m; ++i) dot += a.at(i, k) * a.at(i, j);
      double scale = qr.beta[k] * dot;
      a.at(k, j) -= scale;
      for (std::size_t i = k + 1; i < m; ++i) a.at(i, j) -= a.at(i, k) * scale;
    }
  }
  return qr;
}

// Q v for the thin Q (m x n) of a plain QR, given v of length n.
std::vector<double> apply_q_thin(const PlainQr& qr, std::span<const double> v) {
  std::size_t m = qr.a.rows, n = qr.a.cols;
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i];
  for (std::size_t k = n; k-- > 0;) {
    if (qr.beta[k] == 0.0) continue;
    double dot = out[k];
    for (std::size_t i = k + 1; i < m; ++i) dot += qr.a.at(i, k) * out[i];
    double scale = qr.beta[k] * dot;
    out[k] -= scale;
    for (std::size_t i = k + 1; i < m; ++i) out[i] -= qr.a.at(i, k) * scale;
  }
  return out;
}

}  // namespace

OlsFit fit_ols(const Matrix& x, std::span<const double> y) {
  std::size_t n = x.rows, p = x.cols;
  if (y.size() != n) throw input_error("fit_ols: y length does not match rows");
  if (n < p + 1)
    throw input_error("fit_ols: need at least cols + 1 rows (got " +
                      std::to_string(n) + " rows for " + std::to_string(p) +
                      " columns)");

  // Center: the intercept is recovered from the means afterwards.
  std::vector<double> xmean(p, 0.0);
  double ymean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ymean += y[i];
    for (std::size_t j = 0; j < p; ++j) xmean[j] += x.at(i, j);
  }
  ymean /= static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) xmean[j] /= static_cast<double>(n);

  Matrix xc(n, p);
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) {
    yc[i] = y[i] - ymean;
    for (std::size_t j = 0; j < p; ++j) xc.at(i, j) = x.at(i, j) - xmean[j];
  }

  OlsFit fit;
  fit.coefficients.assign(p, 0.0);
  if (p > 0) {
    Cpqr qr = cpqr(xc);
    std::size_t r = qr.rank;
    fit.rank = r;
    if (r > 0) {
      std::vector<double> qtb = apply_qt(qr, yc);
      std::vector<double> beta_perm(p, 0.0);
      if (r == p) {
        for (std::size_t i = p; i-- > 0;) {
          double s = qtb[i];
          for (std::size_t j = i + 1; j < p; ++j) s -= qr.a.at(i, j) * beta_perm[j];
          beta_perm[i] = s / qr.a.at(i, i);
        }
      } else {
        // Minimum-norm solution through a complete orthogonal decomposition:
        // QR-factor [R11 R12]^T (p x r), solve R~^T t = c1 forward, then the
        // minimizer is Q~ t.
        Matrix rt(p, r);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = i; j < p; ++j) rt.at(j, i) = qr.a.at(i, j);
        PlainQr rq = plain_qr(rt);
        std::vector<double> t(r, 0.0);
        for (std::size_t i = 0; i < r; ++i) {
          double s = qtb[i];
          for (std::size_t j = 0; j < i; ++j) s -= rq.a.at(i, j) * t[j];
          t[i] = s / rq.a.at(i, i);
        }
        beta_perm = apply_q_thin(rq, t);
      }
      for (std::size_t j = 0; j < p; ++j)
        fit.coefficients[qr.pivot[j]] = beta_perm[j];
    }
  }
  fit.intercept = ymean;
  for (std::size_t j = 0; j < p; ++j)
    fit.intercept -= fit.coefficients[j] * xmean[j];
  return fit;
}

std::vector<double> predict(const Matrix& x, const OlsFit& fit) {
  if (x.cols != fit.coefficients.size())
    throw input_error("predict: column count does not match fit");
  std::vector<double> out(x.rows, fit.intercept);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j)
      out[i] += x.at(i, j) * fit.coefficients[j];
  return out;
}

double explained_variance(std::span<const double> y, std::span<const double> yhat,
                          bool* zero_variance) {
  if (y.size() != yhat.size() || y.empty())
    throw input_error("explained_variance: mismatched or empty inputs");
  if (zero_variance) *zero_variance = false;
  double n = static_cast<double>(y.size());
  double ymean = 0.0, rmean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ymean += y[i];
    rmean += y[i] - yhat[i];
  }
  ymean /= n;
  rmean /= n;
  double yvar = 0.0, rvar = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    yvar += (y[i] - ymean) * (y[i] - ymean);
    double r = y[i] - yhat[i];
    rvar += (r - rmean) * (r - rmean);
  }
  if (yvar <= 0.0) {
    if (zero_variance) *zero_variance = true;
    return 0.0;
  }
  return 1.0 - rvar / yvar;
}

double mean_absolute_error(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size() || y.empty())
    throw input_error("mean_absolute_error: mismatched or empty inputs");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += std::abs(y[i] - yhat[i]);
  return total / static_cast<double>(y.size());
}

namespace {

Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) = x.at(rows[i], j);
  return out;
}

std::vector<double> take(std::span<const double> v, std::span<const std::size_t> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

}  // namespace

RegressionResult cross_validate(const Matrix& x, std::span<const double> y,
                                const CvOptions& options) {
  std::size_t n = x.rows;
  if (options.folds < 2) throw input_error("cross-validation needs >= 2 folds");
  if (n < static_cast<std::size_t>(options.folds))
    throw input_error("cross-validation needs at least one row per fold");
  if (y.size() != n) throw input_error("cross_validate: y length mismatch");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  seeded_shuffle(order, options.seed);

  std::size_t folds = static_cast<std::size_t>(options.folds);
  std::size_t base = n / folds, extra = n % folds;
  std::vector<std::pair<std::size_t, std::size_t>> bounds;  // [begin, end)
  std::size_t at = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::size_t size = base + (f < extra ? 1 : 0);
    bounds.emplace_back(at, at + size);
    at += size;
  }

  RegressionResult result;
  result.seed = options.seed;
  result.folds = options.folds;
  result.per_fold.resize(folds);

  auto run_fold = [&](std::size_t f) {
    auto [begin, end] = bounds[f];
    std::vector<std::size_t> test(order.begin() + begin, order.begin() + end);
    std::vector<std::size_t> train;
    train.reserve(n - test.size());
    train.insert(train.end(), order.begin(), order.begin() + begin);
    train.insert(train.end(), order.begin() + end, order.end());

    OlsFit fit = fit_ols(take_rows(x, train), take(y, train));
    std::vector<double> ytest = take(y, test);
    std::vector<double> yhat = predict(take_rows(x, test), fit);
    FoldMetrics metrics;
    metrics.explained_variance =
        explained_variance(ytest, yhat, &metrics.zero_variance_fold);
    metrics.mae = mean_absolute_error(ytest, yhat);
    result.per_fold[f] = metrics;
  };

  int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t f = 0; f < folds; ++f) run_fold(f);
  } else {
    std::vector<std::thread> workers;
    std::size_t chunk = (folds + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t begin = t * chunk;
      std::size_t end = std::min(folds, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        for (std::size_t f = begin; f < end; ++f) run_fold(f);
      });
    }
    for (auto& w : workers) w.join();
  }

  for (const FoldMetrics& m : result.per_fold) {
    result.mean_explained_variance += m.explained_variance;
    result.mean_mae += m.mae;
  }
  result.mean_explained_variance /= static_cast<double>(folds);
  result.mean_mae /= static_cast<double>(folds);

  OlsFit final_fit = fit_ols(x, y);
  result.coefficients = std::move(final_fit.coefficients);
  result.intercept = final_fit.intercept;
  return result;
}

std::string regression_result_json(const RegressionResult& result,
                                   std::span<const Feature> features) {
  nlohmann::json doc;
  doc["coefficients"] = nlohmann::json::object();
  for (std::size_t j = 0; j < result.coefficients.size(); ++j) {
    std::string name = j < features.size()
                           ? std::string(feature_name(features[j]))
                           : "x" + std::to_string(j);
    doc["coefficients"][name] = result.coefficients[j];
  }
  doc["intercept"] = result.intercept;
  doc["per_fold"] = nlohmann::json::array();
  for (const FoldMetrics& m : result.per_fold) {
    nlohmann::json fold{{"explained_variance", m.explained_variance},
                        {"mae", m.mae}};
    if (m.zero_variance_fold) fold["zero_variance_fold"] = true;
    doc["per_fold"].push_back(std::move(fold));
  }
  doc["mean_explained_variance"] = result.mean_explained_variance;
  doc["mean_mae"] = result.mean_mae;
  doc["seed"] = result.seed;
  doc["folds"] = result.folds;
  return doc.dump();
}

}  // namespace datamap
