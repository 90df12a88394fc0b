#include "datamap/stats.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

LanguageProfile LanguageProfile::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("bad language profile: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("speakers") || !doc["speakers"].is_object())
    throw input_error("language profile needs a speakers object");
  LanguageProfile profile;
  if (doc.contains("language") && doc["language"].is_string())
    profile.language = doc["language"].get<std::string>();
  for (const auto& [iso3, pop] : doc["speakers"].items()) {
    if (!pop.is_number() || pop.get<double>() < 0)
      throw input_error("speaker population for " + iso3 + " must be >= 0");
    profile.speakers[iso3] = pop.get<std::int64_t>();
  }
  if (profile.speakers.empty())
    throw input_error("language profile needs at least one country");
  return profile;
}

std::string LanguageProfile::to_json() const {
  json doc;
  doc["language"] = language;
  doc["speakers"] = json::object();
  for (const auto& [iso3, pop] : speakers) doc["speakers"][iso3] = pop;
  return doc.dump();
}

double in_country_share(const DatasetMap& map, const LanguageProfile& profile) {
  double total = map.country_total();
  if (total <= 0.0) throw input_error("empty map");
  double in_country = 0.0;
  for (const auto& [iso3, pop] : profile.speakers) {
    auto it = map.weights.find(iso3);
    if (it != map.weights.end()) in_country += it->second;
  }
  return in_country / total;
}

Unrepresented unrepresented(const DatasetMap& map, std::span<const std::string> universe,
                            double threshold) {
  Unrepresented out;
  for (const auto& iso3 : universe) {
    auto it = map.weights.find(iso3);
    double w = it == map.weights.end() ? 0.0 : it->second;
    if (w <= threshold) out.countries.push_back(iso3);
  }
  std::sort(out.countries.begin(), out.countries.end());
  out.count = out.countries.size();
  return out;
}

double gini(std::span<const double> weights) {
  if (weights.empty()) throw input_error("gini of an empty vector");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw input_error("gini requires nonnegative weights");
    total += w;
  }
  if (total <= 0.0) throw input_error("gini of an all-zero vector");
  // Sorted form of sum_i sum_j |xi - xj| / (2 n sum x).
  std::vector<double> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end());
  double n = static_cast<double>(sorted.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    weighted += static_cast<double>(i + 1) * sorted[i];
  return (2.0 * weighted) / (n * total) - (n + 1.0) / n;
}

double gini_over_universe(const DatasetMap& map, std::span<const std::string> universe) {
  std::vector<double> weights;
  weights.reserve(universe.size());
  for (const auto& iso3 : universe) {
    auto it = map.weights.find(iso3);
    weights.push_back(it == map.weights.end() ? 0.0 : it->second);
  }
  return gini(weights);
}

double bhattacharyya(const std::map<std::string, double>& p,
                     const std::map<std::string, double>& q) {
  auto check = [](const std::map<std::string, double>& dist, const char* name) {
    double sum = 0.0;
    for (const auto& [key, v] : dist) {
      if (v < 0.0)
        throw input_error(std::string(name) + " has a negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw input_error(std::string(name) + " is not normalized");
  };
  check(p, "p");
  check(q, "q");
  double coeff = 0.0;
  for (const auto& [key, pv] : p) {
    auto it = q.find(key);
    if (it != q.end()) coeff += std::sqrt(pv * it->second);
  }
  return coeff;
}

SpeakerComparison speaker_comparison(const DatasetMap& map,
                                     const LanguageProfile& profile) {
  if (profile.speakers.empty()) throw input_error("empty language profile");
  SpeakerComparison out;
  double entity_total = 0.0;
  double speaker_total = 0.0;
  for (const auto& [iso3, pop] : profile.speakers) {
    out.countries.push_back(iso3);
    auto it = map.weights.find(iso3);
    entity_total += it == map.weights.end() ? 0.0 : it->second;
    speaker_total += static_cast<double>(pop);
  }
  for (const auto& [iso3, pop] : profile.speakers) {
    auto it = map.weights.find(iso3);
    double w = it == map.weights.end() ? 0.0 : it->second;
    out.entity_share[iso3] = entity_total > 0.0 ? w / entity_total : 0.0;
    out.speaker_share[iso3] =
        speaker_total > 0.0 ? static_cast<double>(pop) / speaker_total : 0.0;
  }
  out.entity_all_zero = entity_total <= 0.0;
  return out;
}

SpeakerComparison SpeakerComparison::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("bad speaker comparison: ") + e.what());
  }
  SpeakerComparison out;
  if (!doc.is_object() || !doc.contains("entity_share") || !doc.contains("speaker_share"))
    throw input_error("speaker comparison needs entity_share and speaker_share");
  for (const auto& [iso3, v] : doc["entity_share"].items())
    out.entity_share[iso3] = v.get<double>();
  for (const auto& [iso3, v] : doc["speaker_share"].items())
    out.speaker_share[iso3] = v.get<double>();
  for (const auto& [iso3, v] : out.speaker_share) out.countries.push_back(iso3);
  if (doc.contains("entity_all_zero"))
    out.entity_all_zero = doc["entity_all_zero"].get<bool>();
  return out;
}

std::string SpeakerComparison::to_json() const {
  json doc;
  doc["entity_share"] = json::object();
  for (const auto& [iso3, v] : entity_share) doc["entity_share"][iso3] = v;
  doc["speaker_share"] = json::object();
  for (const auto& [iso3, v] : speaker_share) doc["speaker_share"][iso3] = v;
  doc["entity_all_zero"] = entity_all_zero;
  return doc.dump();
}

std::map<std::string, double> region_rollup(const DatasetMap& map,
                                            const CountryRegistry& registry) {
  std::map<std::string, double> rollup;
  for (const auto& [iso3, w] : map.weights) {
    if (w <= 0.0) continue;
    const CountryInfo* info = registry.by_iso3(iso3);
    if (!info) throw input_error("unknown country code in map: " + iso3);
    rollup[std::string(region_name(info->region))] += w;
  }
  if (map.historical > 0.0) rollup[std::string(kHistoryCategory)] = map.historical;
  return rollup;
}

double population_stdev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return std::sqrt(var);
}

RegionBreakdown region_performance(
    const std::map<std::string, double>& item_scores,
    const std::map<std::string, std::vector<std::string>>& item_regions,
    MultiRegionMode mode) {
  RegionBreakdown out;
  std::map<std::string, double> totals;
  for (const auto& [item, score] : item_scores) {
    auto it = item_regions.find(item);
    if (it == item_regions.end() || it->second.empty()) {
      ++out.skipped_items;
      continue;
    }
    for (const auto& region : it->second)
      if (!is_region_or_history(region))
        throw input_error("unknown region for item " + item + ": " + region);
    if (mode == MultiRegionMode::Each) {
      std::set<std::string> distinct(it->second.begin(), it->second.end());
      for (const auto& region : distinct) {
        totals[region] += score;
        ++out.counts[region];
      }
    } else {
      // Dominant: most frequent region for the item; ties break on the
      // (alphabetical) category order of the map.
      std::map<std::string, std::size_t> freq;
      for (const auto& region : it->second) ++freq[region];
      auto best = freq.begin();
      for (auto f = freq.begin(); f != freq.end(); ++f)
        if (f->second > best->second) best = f;
      totals[best->first] += score;
      ++out.counts[best->first];
    }
  }
  std::vector<double> means;
  for (const auto& [region, total] : totals) {
    double mean = total / static_cast<double>(out.counts[region]);
    out.means[region] = mean;
    means.push_back(mean);
  }
  out.macro_stdev = population_stdev(means);
  return out;
}

}  // namespace datamap
