#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "datamap/resolver.hpp"
#include "datamap/stats.hpp"

namespace datamap {

/// Simplified per-country polygons in lon/lat degrees, loaded from a GeoJSON
/// FeatureCollection whose features carry an `iso3` property. Rings beyond
/// the first of a Polygon are holes; MultiPolygon parts are flattened.
struct WorldGeometry {
  struct Feature {
    std::string iso3;
    std::vector<std::vector<std::pair<double, double>>> rings;  // lon, lat
  };
  std::vector<Feature> features;

  static WorldGeometry load(const std::filesystem::path& path);
  static WorldGeometry parse(const std::string& json_text);
};

enum class ColorScale { Log, Linear };

struct ChoroplethOptions {
  ColorScale scale = ColorScale::Log;
  int width = 1000;
  std::string title;  // defaults to "<corpus_id> (<language>)"
};

/// Standalone SVG choropleth: one filled group per country (id = iso3), fill
/// intensity a monotone function of weight, zero-weight countries in the
/// absent color, legend with scale breaks. Weighted countries missing from
/// the geometry are listed as ungeolocated rather than dropped.
std::string emit_choropleth(const DatasetMap& map, const WorldGeometry& geometry,
                            const ChoroplethOptions& options = {});

struct BarsOptions {
  std::size_t top_k = 10;
  int width = 640;
  std::string title;
};

/// Grouped two-series bar chart over the top-k profile countries by entity
/// share: dataset share vs speaker share.
std::string emit_bars(const SpeakerComparison& comparison, const BarsOptions& options = {});

}  // namespace datamap
