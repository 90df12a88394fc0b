#include "datamap/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

WorldGeometry WorldGeometry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open geometry file: " + path.string());
  return parse(std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>()));
}

namespace {

std::vector<std::pair<double, double>> parse_ring(const json& ring) {
  std::vector<std::pair<double, double>> out;
  if (!ring.is_array()) throw input_error("geometry ring must be an array");
  for (const auto& pt : ring) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      throw input_error("geometry point must be [lon, lat]");
    out.emplace_back(pt[0].get<double>(), pt[1].get<double>());
  }
  return out;
}

}  // namespace

WorldGeometry WorldGeometry::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("bad geometry file: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw input_error("geometry must be a GeoJSON FeatureCollection");

  WorldGeometry geo;
  std::map<std::string, std::size_t> index;
  for (const auto& feature : doc["features"]) {
    if (!feature.is_object() || !feature.contains("properties") ||
        !feature["properties"].is_object())
      throw input_error("geometry feature needs properties");
    const json& props = feature["properties"];
    if (!props.contains("iso3") || !props["iso3"].is_string())
      throw input_error("geometry feature needs an iso3 property");
    std::string iso3 = props["iso3"].get<std::string>();
    if (!feature.contains("geometry") || !feature["geometry"].is_object())
      throw input_error("geometry feature " + iso3 + " has no geometry");
    const json& g = feature["geometry"];
    std::string type = g.value("type", "");
    if (!g.contains("coordinates"))
      throw input_error("geometry feature " + iso3 + " has no coordinates");

    std::vector<std::vector<std::pair<double, double>>> rings;
    if (type == "Polygon") {
      for (const auto& ring : g["coordinates"]) rings.push_back(parse_ring(ring));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : g["coordinates"])
        for (const auto& ring : poly) rings.push_back(parse_ring(ring));
    } else {
      throw input_error("geometry feature " + iso3 + " has unsupported type " + type);
    }

    auto [it, inserted] = index.try_emplace(iso3, geo.features.size());
    if (inserted) {
      geo.features.push_back(Feature{std::move(iso3), std::move(rings)});
    } else {
      auto& dst = geo.features[it->second].rings;
      dst.insert(dst.end(), rings.begin(), rings.end());
    }
  }
  return geo;
}

namespace {

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Rgb {
  int r, g, b;
};

constexpr Rgb kRampLight{222, 235, 247};
constexpr Rgb kRampDark{8, 48, 107};
constexpr const char* kAbsentFill = "#ececec";

std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto lerp = [&](int a, int b) {
    return static_cast<int>(std::lround(a + t * (b - a)));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", lerp(kRampLight.r, kRampDark.r),
                lerp(kRampLight.g, kRampDark.g), lerp(kRampLight.b, kRampDark.b));
  return buf;
}

double intensity(double weight, double wmax, ColorScale scale) {
  if (weight <= 0.0 || wmax <= 0.0) return 0.0;
  if (scale == ColorScale::Linear) return weight / wmax;
  return std::log1p(weight) / std::log1p(wmax);
}

}  // namespace

std::string emit_choropleth(const DatasetMap& map, const WorldGeometry& geometry,
                            const ChoroplethOptions& options) {
  int width = options.width;
  int map_height = width / 2;  // equirectangular
  int legend_height = 72;
  int height = map_height + legend_height;

  auto project_x = [&](double lon) { return (lon + 180.0) / 360.0 * width; };
  auto project_y = [&](double lat) { return (90.0 - lat) / 180.0 * map_height; };

  double wmax = 0.0;
  for (const auto& [iso3, w] : map.weights) wmax = std::max(wmax, w);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  std::string title = options.title.empty()
                          ? map.corpus_id + " (" + map.language + ")"
                          : options.title;
  svg << "  <title>" << xml_escape(title) << "</title>\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";

  svg << "  <g id=\"countries\" stroke=\"#666666\" stroke-width=\"0.4\">\n";
  std::set<std::string> drawn;
  for (const auto& feature : geometry.features) {
    auto it = map.weights.find(feature.iso3);
    double w = it == map.weights.end() ? 0.0 : it->second;
    drawn.insert(feature.iso3);
    double t = intensity(w, wmax, options.scale);
    std::string fill = w > 0.0 ? ramp_color(t) : kAbsentFill;
    svg << "    <g id=\"" << xml_escape(feature.iso3) << "\" fill=\"" << fill
        << "\" data-weight=\"" << fmt(w, 4) << "\">\n";
    svg << "      <path fill-rule=\"evenodd\" d=\"";
    for (const auto& ring : feature.rings) {
      for (std::size_t i = 0; i < ring.size(); ++i) {
        svg << (i == 0 ? "M" : "L") << fmt(project_x(ring[i].first)) << ","
            << fmt(project_y(ring[i].second));
      }
      svg << "Z";
    }
    svg << "\"/>\n    </g>\n";
  }
  svg << "  </g>\n";

  // Legend: absent swatch plus four ramp stops with back-computed weights.
  int ly = map_height + 18;
  svg << "  <g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "    <text x=\"8\" y=\"" << ly - 4 << "\" font-size=\"13\">"
      << xml_escape(title) << "</text>\n";
  int lx = 8;
  auto swatch = [&](const std::string& fill, const std::string& label) {
    svg << "    <rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" fill=\""
        << fill << "\" stroke=\"#666666\" stroke-width=\"0.4\"/>\n";
    svg << "    <text x=\"" << lx + 18 << "\" y=\"" << ly + 11 << "\">" << xml_escape(label)
        << "</text>\n";
    lx += 30 + static_cast<int>(8 * label.size());
  };
  swatch(kAbsentFill, "0");
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    double w = wmax <= 0.0 ? 0.0
               : options.scale == ColorScale::Linear
                   ? t * wmax
                   : std::expm1(t * std::log1p(wmax));
    swatch(ramp_color(t), fmt(w, 2));
  }

  // Weighted countries without geometry are called out, never silently lost.
  std::vector<std::string> ungeolocated;
  for (const auto& [iso3, w] : map.weights)
    if (w > 0.0 && !drawn.count(iso3)) ungeolocated.push_back(iso3 + " (" + fmt(w, 2) + ")");
  if (!ungeolocated.empty()) {
    std::string line = "ungeolocated: ";
    for (std::size_t i = 0; i < ungeolocated.size(); ++i) {
      if (i) line += ", ";
      line += ungeolocated[i];
    }
    svg << "    <text x=\"8\" y=\"" << ly + 32 << "\" fill=\"#aa2222\">"
        << xml_escape(line) << "</text>\n";
  }
  svg << "  </g>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string emit_bars(const SpeakerComparison& comparison, const BarsOptions& options) {
  int width = options.width;
  int height = 320;
  int margin_left = 46, margin_bottom = 42, margin_top = 30, margin_right = 12;
  int plot_w = width - margin_left - margin_right;
  int plot_h = height - margin_top - margin_bottom;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  std::string title = options.title.empty() ? "dataset vs speaker share" : options.title;
  svg << "  <title>" << xml_escape(title) << "</title>\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";

  // Countries ordered by entity share (desc), ties by iso3.
  std::vector<std::string> order(comparison.countries);
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    double ea = comparison.entity_share.count(a) ? comparison.entity_share.at(a) : 0.0;
    double eb = comparison.entity_share.count(b) ? comparison.entity_share.at(b) : 0.0;
    if (ea != eb) return ea > eb;
    return a < b;
  });
  if (order.size() > options.top_k) order.resize(options.top_k);

  if (order.empty()) {
    svg << "  <text x=\"" << width / 2 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << "no in-country comparison available</text>\n";
    svg << "</svg>\n";
    return svg.str();
  }

  double ymax = 0.0;
  for (const auto& iso3 : order) {
    if (auto it = comparison.entity_share.find(iso3); it != comparison.entity_share.end())
      ymax = std::max(ymax, it->second);
    if (auto it = comparison.speaker_share.find(iso3); it != comparison.speaker_share.end())
      ymax = std::max(ymax, it->second);
  }
  if (ymax <= 0.0) ymax = 1.0;

  svg << "  <g font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "    <text x=\"" << margin_left << "\" y=\"18\">" << xml_escape(title)
      << "</text>\n";
  // Series legend.
  svg << "    <rect x=\"" << width - 220 << "\" y=\"8\" width=\"12\" height=\"12\" fill=\"#c0392b\"/>\n";
  svg << "    <text x=\"" << width - 204 << "\" y=\"18\">dataset share</text>\n";
  svg << "    <rect x=\"" << width - 110 << "\" y=\"8\" width=\"12\" height=\"12\" fill=\"#27ae60\"/>\n";
  svg << "    <text x=\"" << width - 94 << "\" y=\"18\">speaker share</text>\n";
  svg << "  </g>\n";

  svg << "  <g id=\"bars\">\n";
  double group_w = static_cast<double>(plot_w) / static_cast<double>(order.size());
  double bar_w = std::max(2.0, group_w * 0.35);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& iso3 = order[i];
    double entity = comparison.entity_share.count(iso3)
                        ? comparison.entity_share.at(iso3)
                        : 0.0;
    double speaker = comparison.speaker_share.count(iso3)
                         ? comparison.speaker_share.at(iso3)
                         : 0.0;
    double gx = margin_left + i * group_w;
    auto bar = [&](double share, double offset, const char* series, const char* fill) {
      double h = share / ymax * plot_h;
      double y = margin_top + (plot_h - h);
      svg << "    <rect class=\"" << series << "\" data-iso3=\"" << xml_escape(iso3)
          << "\" data-share=\"" << fmt(share, 4) << "\" x=\"" << fmt(gx + offset)
          << "\" y=\"" << fmt(y, 4) << "\" width=\"" << fmt(bar_w) << "\" height=\""
          << fmt(h, 4) << "\" fill=\"" << fill << "\"/>\n";
    };
    bar(entity, group_w * 0.1, "dataset", "#c0392b");
    bar(speaker, group_w * 0.1 + bar_w + 2.0, "speaker", "#27ae60");
    svg << "    <text x=\"" << fmt(gx + group_w / 2) << "\" y=\"" << height - margin_bottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(iso3) << "</text>\n";
  }
  svg << "  </g>\n";
  svg << "  <line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h
      << "\" x2=\"" << margin_left + plot_w << "\" y2=\"" << margin_top + plot_h
      << "\" stroke=\"#333333\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace datamap
