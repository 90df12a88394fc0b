#include "datamap/factors.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

#include "datamap/text.hpp"

namespace datamap {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(std::string(trim(cell)));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

constexpr const char* kHeader[] = {"iso3",     "pop",          "gdp",
                                   "gdppc",    "land_km2",     "centroid_lat",
                                   "centroid_lon"};

}  // namespace

FactorTable FactorTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open factor table: " + path.string());
  return from_stream(in);
}

FactorTable FactorTable::from_stream(std::istream& in) {
  FactorTable table;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw input_error("factor table is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() != std::size(kHeader))
    throw input_error("factor table header must have 7 columns");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != kHeader[i])
      throw input_error("factor table header column " + std::to_string(i + 1) +
                        " must be `" + kHeader[i] + "`, got `" + header[i] + "`");

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != std::size(kHeader))
      throw input_error("factor table line " + std::to_string(line_no) +
                        ": expected 7 cells, got " + std::to_string(cells.size()));
    const std::string& iso3 = cells[0];
    if (iso3.size() != 3)
      throw input_error("factor table line " + std::to_string(line_no) +
                        ": bad iso3 `" + iso3 + "`");
    auto positive = [&](const std::string& cell,
                        const char* column) -> std::optional<double> {
      if (cell.empty()) return std::nullopt;
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw input_error("factor table line " + std::to_string(line_no) + " (" +
                          iso3 + "): bad number in " + column);
      }
      if (v <= 0.0)
        throw input_error("factor table line " + std::to_string(line_no) + " (" +
                          iso3 + "): " + column + " must be positive");
      return v;
    };
    FactorRow row;
    row.pop = positive(cells[1], "pop");
    row.gdp = positive(cells[2], "gdp");
    row.gdppc = positive(cells[3], "gdppc");
    row.land_km2 = positive(cells[4], "land_km2");
    bool has_lat = !cells[5].empty(), has_lon = !cells[6].empty();
    if (has_lat != has_lon)
      throw input_error("factor table line " + std::to_string(line_no) + " (" +
                        iso3 + "): centroid needs both lat and lon");
    if (has_lat) {
      double lat, lon;
      try {
        lat = std::stod(cells[5]);
        lon = std::stod(cells[6]);
      } catch (const std::exception&) {
        throw input_error("factor table line " + std::to_string(line_no) + " (" +
                          iso3 + "): bad centroid");
      }
      if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
        throw input_error("factor table line " + std::to_string(line_no) + " (" +
                          iso3 + "): centroid out of range");
      row.centroid = {lat, lon};
    }
    if (!table.rows.emplace(iso3, row).second)
      throw input_error("factor table line " + std::to_string(line_no) +
                        ": duplicate iso3 " + iso3);
  }
  return table;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  double phi1 = lat1 * kDegToRad;
  double phi2 = lat2 * kDegToRad;
  double dphi = (lat2 - lat1) * kDegToRad;
  double dlambda = (lon2 - lon1) * kDegToRad;
  double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
             std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) *
                 std::sin(dlambda / 2);
  a = std::min(1.0, std::max(0.0, a));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

double geo_feature(const std::string& target_iso3, const LanguageProfile& profile,
                   const FactorTable& table) {
  auto centroid_of = [&](const std::string& iso3) -> std::pair<double, double> {
    auto it = table.rows.find(iso3);
    if (it == table.rows.end() || !it->second.centroid)
      throw input_error("missing centroid for country " + iso3);
    return *it->second.centroid;
  };
  auto [tlat, tlon] = centroid_of(target_iso3);
  double speaker_total = 0.0;
  for (const auto& [iso3, pop] : profile.speakers)
    speaker_total += static_cast<double>(pop);
  if (speaker_total <= 0.0)
    throw input_error("language profile has no speaker population");
  double distance = 0.0;
  for (const auto& [iso3, pop] : profile.speakers) {
    auto [slat, slon] = centroid_of(iso3);
    double w = static_cast<double>(pop) / speaker_total;
    distance += w * haversine_km(tlat, tlon, slat, slon);
  }
  return distance;
}

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::Pop: return "pop";
    case Feature::Gdp: return "gdp";
    case Feature::GdpPerCapita: return "gdppc";
    case Feature::Land: return "land";
    case Feature::Geo: return "geo";
  }
  return "pop";
}

std::vector<Feature> parse_features(std::string_view spec) {
  std::vector<Feature> features;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto plus = spec.find('+', pos);
    std::string_view name = trim(spec.substr(pos, plus == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : plus - pos));
    if (name == "pop")
      features.push_back(Feature::Pop);
    else if (name == "gdp")
      features.push_back(Feature::Gdp);
    else if (name == "gdppc")
      features.push_back(Feature::GdpPerCapita);
    else if (name == "land")
      features.push_back(Feature::Land);
    else if (name == "geo")
      features.push_back(Feature::Geo);
    else
      throw input_error("unknown factor `" + std::string(name) +
                        "` (expected pop, gdp, gdppc, land, geo joined by +)");
    for (std::size_t i = 0; i < features.size() - 1; ++i)
      if (features[i] == features.back())
        throw input_error("factor listed twice: " + std::string(name));
    if (plus == std::string_view::npos) break;
    pos = plus + 1;
  }
  if (features.empty()) throw input_error("no factors given");
  return features;
}

Design build_design(const DatasetMap& map, const FactorTable& table,
                    const LanguageProfile* profile, std::span<const Feature> features,
                    const CountryRegistry& registry, const DesignOptions& options) {
  if (features.empty()) throw input_error("no factors given");
  bool needs_geo = false;
  for (Feature f : features) needs_geo |= f == Feature::Geo;
  if (needs_geo && !profile)
    throw input_error("the geo factor needs a language profile");

  Design design;
  design.features.assign(features.begin(), features.end());

  std::vector<std::vector<double>> columns(features.size());
  for (const CountryInfo& country : registry.entries()) {
    auto row_it = table.rows.find(country.iso3);
    if (row_it == table.rows.end()) continue;
    const FactorRow& row = row_it->second;

    auto weight_it = map.weights.find(country.iso3);
    double weight = weight_it == map.weights.end() ? 0.0 : weight_it->second;
    if (options.positive_only && weight <= 0.0) continue;

    std::vector<double> values;
    values.reserve(features.size());
    bool usable = true;
    for (Feature f : features) {
      std::optional<double> raw;
      switch (f) {
        case Feature::Pop: raw = row.pop; break;
        case Feature::Gdp: raw = row.gdp; break;
        case Feature::GdpPerCapita: raw = row.gdppc; break;
        case Feature::Land: raw = row.land_km2; break;
        case Feature::Geo: break;
      }
      if (f == Feature::Geo) {
        if (!row.centroid) {
          usable = false;
          break;
        }
        values.push_back(geo_feature(country.iso3, *profile, table) * 1e-3);
      } else if (raw) {
        values.push_back(std::log(*raw));
      } else {
        usable = false;
        break;
      }
    }
    if (!usable) {
      ++design.excluded_rows;
      continue;
    }
    design.countries.push_back(country.iso3);
    design.y.push_back(options.positive_only ? std::log(weight)
                                             : std::log1p(weight));
    for (std::size_t j = 0; j < values.size(); ++j) columns[j].push_back(values[j]);
  }

  if (design.countries.size() < 2)
    throw input_error("fewer than 2 usable rows in the factor design");

  std::size_t n = design.countries.size();
  design.x = Matrix(n, features.size());
  design.zero_variance.assign(features.size(), false);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    double mean = 0.0;
    for (double v : columns[j]) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : columns[j]) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var <= 0.0) {
      design.zero_variance[j] = true;
      continue;  // column stays all zeros
    }
    double sd = std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i)
      design.x.at(i, j) = (columns[j][i] - mean) / sd;
  }
  return design;
}

}  // namespace datamap
