#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "datamap/factors.hpp"
#include "datamap/regression.hpp"
#include "datamap/text.hpp"
#include "helpers.hpp"

using namespace datamap;

TEST_CASE("splitmix64 reference sequence") {
  // Published reference outputs for the zero seed.
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFull);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ull);
  CHECK(rng.next() == 0x06C45D188009454Full);
}

TEST_CASE("seeded shuffle is deterministic and a permutation") {
  std::vector<std::size_t> a(100), b(100);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = b[i] = i;
  seeded_shuffle(a, 17);
  seeded_shuffle(b, 17);
  CHECK(a == b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  std::vector<std::size_t> c(100);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = i;
  seeded_shuffle(c, 18);
  CHECK(a != c);
}

TEST_CASE("haversine: zero distance, symmetry, quarter circle") {
  CHECK(haversine_km(52.0, 20.0, 52.0, 20.0) == doctest::Approx(0.0));
  CHECK(haversine_km(10, 20, -30, 40) == doctest::Approx(haversine_km(-30, 40, 10, 20)));
  // (0,0) to (0,90): a quarter of the great circle.
  CHECK(haversine_km(0, 0, 0, 90) ==
        doctest::Approx(std::numbers::pi / 2.0 * 6371.0).epsilon(1e-12));
}

TEST_CASE("haversine: longitude translation invariance") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    double lat1 = static_cast<double>(rng.next() % 1600) / 10.0 - 80.0;
    double lat2 = static_cast<double>(rng.next() % 1600) / 10.0 - 80.0;
    double lon1 = static_cast<double>(rng.next() % 3600) / 10.0 - 180.0;
    double lon2 = static_cast<double>(rng.next() % 3600) / 10.0 - 180.0;
    double shift = static_cast<double>(rng.next() % 3600) / 10.0;
    auto wrap = [](double lon) {
      while (lon > 180.0) lon -= 360.0;
      while (lon < -180.0) lon += 360.0;
      return lon;
    };
    double base = haversine_km(lat1, lon1, lat2, lon2);
    double shifted = haversine_km(lat1, wrap(lon1 + shift), lat2, wrap(lon2 + shift));
    CHECK(shifted == doctest::Approx(base).epsilon(1e-9));
  }
}

namespace {

FactorTable table_from(const std::string& csv) {
  std::istringstream in(csv);
  return FactorTable::from_stream(in);
}

const char* kHeaderLine = "iso3,pop,gdp,gdppc,land_km2,centroid_lat,centroid_lon\n";

}  // namespace

TEST_CASE("factor table: parsing, missing cells, validation") {
  auto table = table_from(std::string(kHeaderLine) +
                          "POL,38000000,600000000000,15700,306190,52.0,20.0\n"
                          "ABC,1000,,,,,\n");
  CHECK(table.rows.at("POL").gdp == doctest::Approx(6e11));
  CHECK(table.rows.at("ABC").pop == doctest::Approx(1000));
  CHECK_FALSE(table.rows.at("ABC").gdp.has_value());
  CHECK_FALSE(table.rows.at("ABC").centroid.has_value());

  CHECK_THROWS_AS(table_from("iso3,pop\nPOL,1\n"), input_error);
  CHECK_THROWS_AS(table_from(std::string(kHeaderLine) + "POL,-5,,,,,\n"), input_error);
  CHECK_THROWS_AS(table_from(std::string(kHeaderLine) + "POL,1,,,,52.0,\n"), input_error);
  CHECK_THROWS_AS(table_from(std::string(kHeaderLine) + "POL,1,,,,,\nPOL,2,,,,,\n"),
                  input_error);
}

TEST_CASE("geo_feature: sole profile country gives zero") {
  auto table = table_from(std::string(kHeaderLine) + "POL,,,,,52.0,20.0\n");
  LanguageProfile profile;
  profile.speakers = {{"POL", 1000}};
  CHECK(geo_feature("POL", profile, table) == doctest::Approx(0.0));
}

TEST_CASE("geo_feature: population-weighted mean of distances") {
  auto table = table_from(std::string(kHeaderLine) +
                          "TGT,,,,,0.0,0.0\n"
                          "AAA,,,,,0.0,10.0\n"
                          "BBB,,,,,0.0,30.0\n");
  LanguageProfile profile;
  profile.speakers = {{"AAA", 1000000}, {"BBB", 1000000}};
  // Independent oracle: equal weights, plain mean of the two distances.
  double d1 = haversine_km(0, 0, 0, 10);
  double d2 = haversine_km(0, 0, 0, 30);
  CHECK(geo_feature("TGT", profile, table) ==
        doctest::Approx(0.5 * d1 + 0.5 * d2).epsilon(1e-12));

  // 3:1 population split shifts the mean accordingly.
  profile.speakers = {{"AAA", 3000000}, {"BBB", 1000000}};
  CHECK(geo_feature("TGT", profile, table) ==
        doctest::Approx(0.75 * d1 + 0.25 * d2).epsilon(1e-12));
}

TEST_CASE("geo_feature: missing centroid errors name the country") {
  auto table = table_from(std::string(kHeaderLine) +
                          "TGT,,,,,0.0,0.0\n"
                          "AAA,5,,,,,\n");
  LanguageProfile profile;
  profile.speakers = {{"AAA", 10}};
  CHECK_THROWS_WITH_AS(geo_feature("TGT", profile, table), doctest::Contains("AAA"),
                       input_error);
}

namespace {

CountryRegistry design_registry() {
  std::istringstream in(R"(
{"qid":"Q36","iso3":"POL","region":"Europe","centroid":[52.0,20.0]}
{"qid":"Q183","iso3":"DEU","region":"Europe","centroid":[51.1,10.4]}
{"qid":"Q30","iso3":"USA","region":"Americas","centroid":[39.8,-98.6]}
{"qid":"Q114","iso3":"KEN","region":"Africa","centroid":[0.5,37.9]}
)");
  return CountryRegistry::from_stream(in);
}

}  // namespace

TEST_CASE("build_design: target is ln(1+weight), zero weight included") {
  auto reg = design_registry();
  auto table = table_from(std::string(kHeaderLine) +
                          "POL,38000000,6e11,15700,306190,52.0,20.0\n"
                          "DEU,83000000,3.8e12,46000,349390,51.1,10.4\n"
                          "USA,332000000,2.1e13,63000,9147420,39.8,-98.6\n");
  DatasetMap map;
  map.weights = {{"POL", 3.0}};
  std::vector<Feature> features{Feature::Pop, Feature::Gdp};
  Design design = build_design(map, table, nullptr, features, reg);
  REQUIRE(design.countries == std::vector<std::string>{"DEU", "POL", "USA"});
  CHECK(design.y[0] == doctest::Approx(0.0));             // ln(1+0)
  CHECK(design.y[1] == doctest::Approx(std::log(4.0)));   // ln(1+3)
  CHECK(design.excluded_rows == 0);
}

TEST_CASE("build_design: standardization moments and the two-row sign case") {
  auto reg = design_registry();
  auto table = table_from(std::string(kHeaderLine) +
                          "POL,38000000,,,,,\n"
                          "DEU,83000000,,,,,\n");
  DatasetMap map;
  std::vector<Feature> features{Feature::Pop};
  Design design = build_design(map, table, nullptr, features, reg);
  REQUIRE(design.x.rows == 2);
  CHECK(design.x.at(0, 0) == doctest::Approx(1.0));   // DEU above the mean
  CHECK(design.x.at(1, 0) == doctest::Approx(-1.0));  // POL below
}

TEST_CASE("build_design: standardized columns have zero mean, unit variance") {
  auto reg = design_registry();
  auto table = table_from(std::string(kHeaderLine) +
                          "POL,38000000,6e11,15700,306190,52.0,20.0\n"
                          "DEU,83000000,3.8e12,46000,349390,51.1,10.4\n"
                          "USA,332000000,2.1e13,63000,9147420,39.8,-98.6\n"
                          "KEN,53000000,1.0e11,1900,569140,0.5,37.9\n");
  DatasetMap map;
  map.weights = {{"POL", 3.0}, {"KEN", 1.0}};
  LanguageProfile profile;
  profile.speakers = {{"POL", 1000}};
  std::vector<Feature> features{Feature::Pop, Feature::Gdp, Feature::GdpPerCapita,
                                Feature::Land, Feature::Geo};
  Design design = build_design(map, table, &profile, features, reg);
  REQUIRE(design.x.rows == 4);
  for (std::size_t j = 0; j < design.x.cols; ++j) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < design.x.rows; ++i) mean += design.x.at(i, j);
    mean /= 4.0;
    for (std::size_t i = 0; i < design.x.rows; ++i)
      var += (design.x.at(i, j) - mean) * (design.x.at(i, j) - mean);
    var /= 4.0;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("build_design: rows missing a requested covariate are excluded and counted") {
  auto reg = design_registry();
  auto table = table_from(std::string(kHeaderLine) +
                          "POL,38000000,6e11,,,,\n"
                          "DEU,83000000,,,,,\n"
                          "USA,332000000,2.1e13,,,,\n");
  DatasetMap map;
  std::vector<Feature> features{Feature::Pop, Feature::Gdp};
  Design design = build_design(map, table, nullptr, features, reg);
  CHECK(design.countries == std::vector<std::string>{"POL", "USA"});
  CHECK(design.excluded_rows == 1);
}

TEST_CASE("build_design: fewer than two usable rows errors") {
  auto reg = design_registry();
  auto table = table_from(std::string(kHeaderLine) + "POL,38000000,,,,,\n");
  DatasetMap map;
  std::vector<Feature> features{Feature::Pop};
  CHECK_THROWS_AS(build_design(map, table, nullptr, features, reg), input_error);
}

TEST_CASE("parse_features grammar") {
  auto f = parse_features("pop+gdp+geo");
  REQUIRE(f.size() == 3);
  CHECK(f[0] == Feature::Pop);
  CHECK(f[2] == Feature::Geo);
  CHECK(parse_features("land").size() == 1);
  CHECK_THROWS_AS(parse_features("pop+nope"), input_error);
  CHECK_THROWS_AS(parse_features("pop+pop"), input_error);
  CHECK_THROWS_AS(parse_features(""), input_error);
}

namespace {

Matrix matrix_of(const std::vector<std::vector<double>>& rows) {
  Matrix x(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < x.cols; ++j) x.at(i, j) = rows[i][j];
  return x;
}

}  // namespace

TEST_CASE("fit_ols: exact recovery of a linear relation") {
  Matrix x = matrix_of({{1, 2}, {2, 1}, {3, 5}, {4, 2}, {5, 9}});
  std::vector<double> y(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    y[i] = 3.0 + 2.0 * x.at(i, 0) - 0.5 * x.at(i, 1);
  OlsFit fit = fit_ols(x, y);
  CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.coefficients[1] == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-10));
  auto yhat = predict(x, fit);
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(std::abs(yhat[i] - y[i]) < 1e-8);
  CHECK(explained_variance(y, yhat) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_ols: constant column gets slope 0, intercept mean(y)") {
  Matrix x = matrix_of({{2}, {2}, {2}, {2}});
  std::vector<double> y{1, 2, 3, 6};
  OlsFit fit = fit_ols(x, y);
  CHECK(fit.coefficients[0] == doctest::Approx(0.0));
  CHECK(fit.intercept == doctest::Approx(3.0));
  CHECK(fit.rank == 0);
}

TEST_CASE("fit_ols: all-identical y degenerates to zero slopes") {
  Matrix x = matrix_of({{1, 2}, {3, 4}, {5, 1}, {2, 2}});
  std::vector<double> y{7, 7, 7, 7};
  OlsFit fit = fit_ols(x, y);
  CHECK(fit.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.coefficients[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(7.0));
}

TEST_CASE("fit_ols: matches the normal-equations oracle on random systems") {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 10 + rng.next() % 100;
    std::size_t p = 1 + rng.next() % 5;
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    std::vector<double> y(n);
    auto uniform = [&]() {
      return static_cast<double>(rng.next() % 2000000) / 100000.0 - 10.0;
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) rows[i][j] = uniform();
      y[i] = uniform();
    }
    auto oracle = testutil::normal_equations_ols(rows, y);
    OlsFit fit = fit_ols(matrix_of(rows), y);
    auto close = [](double a, double b) {
      return std::abs(a - b) <= 1e-6 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    };
    CHECK(close(fit.intercept, oracle[0]));
    for (std::size_t j = 0; j < p; ++j) CHECK(close(fit.coefficients[j], oracle[j + 1]));
  }
}

TEST_CASE("fit_ols: rank-deficient design gets the minimum-norm solution") {
  // Second column is an exact copy of the first.
  Matrix x = matrix_of({{1, 1}, {2, 2}, {3, 3}, {4, 4}, {0, 0}});
  std::vector<double> y{2, 4, 6, 8, 0};
  OlsFit fit = fit_ols(x, y);
  CHECK(fit.rank == 1);
  // Fits exactly, and the minimum-norm split puts 1 on each duplicate.
  auto yhat = predict(x, fit);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(yhat[i] - y[i]) < 1e-9);
  CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.coefficients[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit_ols: needs rows >= cols + 1") {
  Matrix x = matrix_of({{1, 2}, {3, 4}});
  std::vector<double> y{1, 2};
  CHECK_THROWS_AS(fit_ols(x, y), input_error);
}

TEST_CASE("explained variance: mean predictor scores zero by definition") {
  std::vector<double> y{1, 2, 3, 4};
  std::vector<double> yhat(4, 2.5);
  CHECK(explained_variance(y, yhat) == doctest::Approx(0.0).epsilon(1e-12));
  bool flag = false;
  std::vector<double> flat{5, 5, 5};
  CHECK(explained_variance(flat, flat, &flag) == doctest::Approx(0.0));
  CHECK(flag);
  CHECK(mean_absolute_error(y, yhat) == doctest::Approx(1.0));
}

TEST_CASE("cross_validate: perfectly linear data") {
  SplitMix64 rng(31);
  std::size_t n = 60;
  Matrix x(n, 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.at(i, 0) = static_cast<double>(rng.next() % 1000) / 100.0;
    x.at(i, 1) = static_cast<double>(rng.next() % 1000) / 100.0;
    y[i] = 1.0 - 2.0 * x.at(i, 0) + 0.25 * x.at(i, 1);
  }
  CvOptions options;
  options.folds = 5;
  options.seed = 17;
  RegressionResult r = cross_validate(x, y, options);
  CHECK(r.mean_explained_variance == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.mean_mae < 1e-6);
  CHECK(r.per_fold.size() == 5);
  for (const auto& fold : r.per_fold) CHECK(fold.explained_variance <= 1.0 + 1e-12);
}

TEST_CASE("cross_validate: fold sizes cover all rows") {
  // 13 rows over 5 folds: sizes 3,3,3,2,2.
  Matrix x(13, 1);
  std::vector<double> y(13);
  for (std::size_t i = 0; i < 13; ++i) {
    x.at(i, 0) = static_cast<double>(i);
    y[i] = static_cast<double>(i % 3);
  }
  CvOptions options;
  options.folds = 5;
  RegressionResult r = cross_validate(x, y, options);
  CHECK(r.per_fold.size() == 5);

  Matrix tiny(3, 1);
  std::vector<double> ty{1, 2, 3};
  CvOptions bad;
  bad.folds = 5;
  CHECK_THROWS_AS(cross_validate(tiny, ty, bad), input_error);
}

TEST_CASE("cross_validate: constant target flags zero-variance folds") {
  Matrix x(10, 1);
  std::vector<double> y(10, 4.2);
  for (std::size_t i = 0; i < 10; ++i) x.at(i, 0) = static_cast<double>(i);
  CvOptions options;
  options.folds = 5;
  RegressionResult r = cross_validate(x, y, options);
  for (const FoldMetrics& fold : r.per_fold) {
    CHECK(fold.explained_variance == doctest::Approx(0.0));
    CHECK(fold.zero_variance_fold);
    CHECK(fold.mae == doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK(r.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.intercept == doctest::Approx(4.2));
}

TEST_CASE("cross_validate: byte-identical across runs and thread counts") {
  SplitMix64 rng(77);
  std::size_t n = 50;
  Matrix x(n, 3);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j)
      x.at(i, j) = static_cast<double>(rng.next() % 10000) / 500.0;
    y[i] = static_cast<double>(rng.next() % 10000) / 500.0;
  }
  std::vector<Feature> features{Feature::Pop, Feature::Gdp, Feature::Geo};
  CvOptions serial;
  serial.folds = 5;
  serial.seed = 17;
  serial.threads = 1;
  CvOptions parallel = serial;
  parallel.threads = 4;
  std::string a = regression_result_json(cross_validate(x, y, serial), features);
  std::string b = regression_result_json(cross_validate(x, y, parallel), features);
  std::string c = regression_result_json(cross_validate(x, y, serial), features);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("nested models never fit the training data worse") {
  SplitMix64 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 30;
    Matrix wide(n, 3), narrow(n, 2);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double v = static_cast<double>(rng.next() % 10000) / 500.0;
        wide.at(i, j) = v;
        if (j < 2) narrow.at(i, j) = v;
      }
      y[i] = static_cast<double>(rng.next() % 10000) / 500.0;
    }
    auto rss = [&](const Matrix& x) {
      OlsFit fit = fit_ols(x, y);
      auto yhat = predict(x, fit);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        total += (y[i] - yhat[i]) * (y[i] - yhat[i]);
      return total;
    };
    CHECK(rss(wide) <= rss(narrow) + 1e-9);
  }
}

TEST_CASE("design rows are canonical, so input row order cannot change folds") {
  auto reg = design_registry();
  auto forward = table_from(std::string(kHeaderLine) +
                            "POL,38000000,6e11,,,,\n"
                            "DEU,83000000,3.8e12,,,,\n"
                            "USA,332000000,2.1e13,,,,\n"
                            "KEN,53000000,1.0e11,,,,\n");
  auto reversed = table_from(std::string(kHeaderLine) +
                             "KEN,53000000,1.0e11,,,,\n"
                             "USA,332000000,2.1e13,,,,\n"
                             "DEU,83000000,3.8e12,,,,\n"
                             "POL,38000000,6e11,,,,\n");
  DatasetMap map;
  map.weights = {{"POL", 5.0}, {"USA", 2.0}};
  std::vector<Feature> features{Feature::Pop, Feature::Gdp};
  Design a = build_design(map, forward, nullptr, features, reg);
  Design b = build_design(map, reversed, nullptr, features, reg);
  CHECK(a.countries == b.countries);
  CHECK(a.x.data == b.x.data);
  CHECK(a.y == b.y);
}
