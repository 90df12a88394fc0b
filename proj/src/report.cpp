#include "datamap/report.hpp"

#include <chrono>
#include <ctime>

#include <json.hpp>

#include "datamap/text.hpp"
#include "datamap/version.hpp"

namespace datamap {

using nlohmann::json;

namespace {

std::string utc_now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string emit_report(const DatasetMap& map, const LanguageProfile* profile,
                        const CountryRegistry& registry, const ReportOptions& options) {
  json doc;
  json notes = json::object();

  doc["corpus_id"] = map.corpus_id;
  doc["language"] = map.language;
  doc["tool_version"] = std::string(kVersion);
  if (!options.reproducible)
    doc["generated_at"] = options.generated_at ? *options.generated_at
                                               : utc_now_iso8601();

  double resolved = map.country_total();
  doc["totals"] = {{"mentions", map.mentions},
                   {"resolved", resolved},
                   {"historical", map.historical},
                   {"unresolved", map.unresolved}};

  doc["country_weights"] = json::object();
  for (const auto& [iso3, w] : map.weights) doc["country_weights"][iso3] = w;

  auto guarded = [&](const char* field, auto&& compute) {
    try {
      doc[field] = compute();
    } catch (const input_error& e) {
      doc[field] = nullptr;
      notes[field] = e.what();
    }
  };

  guarded("in_country_share", [&]() -> json {
    if (!profile) throw input_error("no language profile");
    return in_country_share(map, *profile);
  });

  auto universe = registry.iso3_universe();
  guarded("unrepresented", [&]() -> json {
    Unrepresented u = unrepresented(map, universe, options.threshold);
    return json{{"count", u.count}, {"countries", u.countries}};
  });

  guarded("gini", [&]() -> json {
    if (!options.gini_restricted) return gini_over_universe(map, universe);
    std::vector<std::string> weighted;
    for (const auto& [iso3, w] : map.weights) weighted.push_back(iso3);
    return gini_over_universe(map, weighted);
  });

  guarded("speaker_comparison", [&]() -> json {
    if (!profile) throw input_error("no language profile");
    SpeakerComparison cmp = speaker_comparison(map, *profile);
    json entity = json::object(), speaker = json::object();
    for (const auto& [iso3, v] : cmp.entity_share) entity[iso3] = v;
    for (const auto& [iso3, v] : cmp.speaker_share) speaker[iso3] = v;
    json out{{"entity_share", entity}, {"speaker_share", speaker}};
    if (cmp.entity_all_zero) out["entity_all_zero"] = true;
    return out;
  });

  guarded("region_rollup", [&]() -> json {
    json out = json::object();
    for (const auto& [region, w] : region_rollup(map, registry)) out[region] = w;
    return out;
  });

  if (!notes.empty()) doc["notes"] = notes;
  return doc.dump(2) + "\n";
}

}  // namespace datamap
