#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "datamap/registry.hpp"
#include "datamap/resolver.hpp"

namespace datamap {

/// A language's in-country set with speaker populations (Ethnologue-style).
struct LanguageProfile {
  std::string language;
  std::map<std::string, std::int64_t> speakers;  // iso3 -> population

  static LanguageProfile parse(const std::string& json_text);
  std::string to_json() const;
};

/// Fraction of the dataset's country mass that falls inside the profile's
/// in-country set. Throws input_error("empty map") when there is no country
/// mass at all.
double in_country_share(const DatasetMap& map, const LanguageProfile& profile);

struct Unrepresented {
  std::size_t count = 0;
  std::vector<std::string> countries;  // sorted iso3
};

Unrepresented unrepresented(const DatasetMap& map, std::span<const std::string> universe,
                            double threshold = 0.0);

/// Population Gini over a weight vector: sum |xi - xj| / (2 n sum x).
double gini(std::span<const double> weights);

/// Gini over a fixed universe, absent countries entering as zeros.
double gini_over_universe(const DatasetMap& map, std::span<const std::string> universe);

/// Bhattacharyya coefficient sum sqrt(p_i q_i) over the union of keys. Both
/// inputs must sum to 1 within 1e-6.
double bhattacharyya(const std::map<std::string, double>& p,
                     const std::map<std::string, double>& q);

/// The paper's paired red/green bars: dataset entity share vs speaker share,
/// both restricted to the profile countries and normalized.
struct SpeakerComparison {
  std::vector<std::string> countries;  // profile keys, sorted
  std::map<std::string, double> entity_share;
  std::map<std::string, double> speaker_share;
  bool entity_all_zero = false;  // no in-country entity mass

  static SpeakerComparison parse(const std::string& json_text);
  std::string to_json() const;
};

SpeakerComparison speaker_comparison(const DatasetMap& map, const LanguageProfile& profile);

/// Weights summed per region; the historical tally reported under "History".
/// Only categories with positive mass appear. Unknown iso3 is an error
/// naming the code.
std::map<std::string, double> region_rollup(const DatasetMap& map,
                                            const CountryRegistry& registry);

enum class MultiRegionMode {
  Each,      // an item counts once toward every region it touches
  Dominant,  // only toward its most frequent region (ties by region order)
};

struct RegionBreakdown {
  std::map<std::string, double> means;        // region or "History" -> mean score
  std::map<std::string, std::size_t> counts;  // items contributing
  double macro_stdev = 0.0;  // population stdev over the nonempty means
  std::size_t skipped_items = 0;  // items with an empty region set
};

/// Region-level performance rollup: item scores (0-100 scale) grouped by the
/// regions of the entities each item contains.
RegionBreakdown region_performance(
    const std::map<std::string, double>& item_scores,
    const std::map<std::string, std::vector<std::string>>& item_regions,
    MultiRegionMode mode = MultiRegionMode::Each);

/// Population standard deviation (divide by N).
double population_stdev(std::span<const double> values);

}  // namespace datamap
