#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "datamap/factors.hpp"

namespace datamap {

/// splitmix64: the documented PRNG behind every seeded shuffle, so folds are
/// reproducible across implementations.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

/// Fisher-Yates with splitmix64 draws reduced by modulo.
void seeded_shuffle(std::vector<std::size_t>& indices, std::uint64_t seed);

struct OlsFit {
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::size_t rank = 0;  // of the centered design
};

/// Ordinary least squares with intercept, solved by Householder QR with
/// column pivoting; rank-deficient designs get the minimum-norm solution via
/// a complete orthogonal decomposition. Requires rows >= cols + 1.
OlsFit fit_ols(const Matrix& x, std::span<const double> y);

std::vector<double> predict(const Matrix& x, const OlsFit& fit);

/// 1 - Var(y - yhat) / Var(y), population variances. Var(y) == 0 reports 0
/// and sets the flag.
double explained_variance(std::span<const double> y, std::span<const double> yhat,
                          bool* zero_variance = nullptr);

double mean_absolute_error(std::span<const double> y, std::span<const double> yhat);

struct FoldMetrics {
  double explained_variance = 0.0;
  double mae = 0.0;
  bool zero_variance_fold = false;
};

struct RegressionResult {
  std::vector<double> coefficients;  // from a fit on all rows
  double intercept = 0.0;
  std::vector<FoldMetrics> per_fold;
  double mean_explained_variance = 0.0;
  double mean_mae = 0.0;
  std::uint64_t seed = 0;
  int folds = 0;
};

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Rows are shuffled once by the seed, then cut into contiguous folds of
/// size n/folds (the first n mod folds folds take one extra row). Each fold
/// is scored on the held-out rows of a fit over the rest.
RegressionResult cross_validate(const Matrix& x, std::span<const double> y,
                                const CvOptions& options = {});

std::string regression_result_json(const RegressionResult& result,
                                   std::span<const Feature> features);

}  // namespace datamap
