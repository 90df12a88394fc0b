#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datamap/registry.hpp"
#include "datamap/resolver.hpp"
#include "datamap/stats.hpp"

namespace datamap {

/// One country's socioeconomic covariates. Absent cells stay nullopt; rows
/// missing a feature a design asks for are dropped from that design and
/// counted.
struct FactorRow {
  std::optional<double> pop;
  std::optional<double> gdp;
  std::optional<double> gdppc;
  std::optional<double> land_km2;
  std::optional<std::pair<double, double>> centroid;  // lat, lon
};

struct FactorTable {
  std::map<std::string, FactorRow> rows;  // iso3 -> covariates

  /// CSV with header `iso3,pop,gdp,gdppc,land_km2,centroid_lat,centroid_lon`.
  /// Empty cells are missing values; present values must be positive.
  static FactorTable load(const std::filesystem::path& path);
  static FactorTable from_stream(std::istream& in);
};

/// Great-circle distance on a sphere of radius 6371.0 km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

/// Speaker-population-weighted mean distance from the target country to the
/// profile countries. Errors name the country whose centroid is missing.
double geo_feature(const std::string& target_iso3, const LanguageProfile& profile,
                   const FactorTable& table);

enum class Feature { Pop, Gdp, GdpPerCapita, Land, Geo };

std::string_view feature_name(Feature f);

/// Parses the CLI grammar `pop+gdp+geo`.
std::vector<Feature> parse_features(std::string_view spec);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Design {
  Matrix x;                            // standardized feature columns
  std::vector<double> y;               // ln(1 + weight) per country
  std::vector<std::string> countries;  // row order, sorted iso3
  std::vector<Feature> features;
  std::size_t excluded_rows = 0;       // rows missing a requested covariate
  std::vector<bool> zero_variance;     // per feature column
};

struct DesignOptions {
  /// Keep only countries with positive weight and regress ln(count) instead
  /// of ln(1 + count).
  bool positive_only = false;
};

/// Rows are registry countries present in the factor table (sorted by iso3).
/// pop/gdp/gdppc/land enter as ln(value), geo as thousands of km; every
/// column is then standardized to zero mean and unit variance.
Design build_design(const DatasetMap& map, const FactorTable& table,
                    const LanguageProfile* profile, std::span<const Feature> features,
                    const CountryRegistry& registry, const DesignOptions& options = {});

}  // namespace datamap
