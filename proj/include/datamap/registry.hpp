#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace datamap {

enum class Region { Africa, Americas, Asia, Europe, Oceania };

inline constexpr std::string_view kHistoryCategory = "History";

std::string_view region_name(Region region);
Region parse_region(std::string_view name);  // throws input_error on unknown
bool is_region_or_history(std::string_view name);

struct CountryInfo {
  std::string qid;
  std::string iso3;
  Region region = Region::Europe;
  double lat = 0.0;
  double lon = 0.0;
};

/// The modern-country universe: Wikidata QID -> ISO 3166-1 alpha-3 code,
/// one of the five regions, and an approximate centroid. Membership in this
/// registry is what "modern country" means for resolution; everything else
/// a chain terminates at counts as historical.
class CountryRegistry {
 public:
  static CountryRegistry load(const std::filesystem::path& path);
  static CountryRegistry from_stream(std::istream& in);

  const CountryInfo* by_qid(std::string_view qid) const;
  const CountryInfo* by_iso3(std::string_view iso3) const;

  /// Entries sorted by iso3.
  const std::vector<CountryInfo>& entries() const { return entries_; }
  std::vector<std::string> iso3_universe() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<CountryInfo> entries_;
  std::vector<std::size_t> by_qid_;   // indices into entries_, sorted by qid
};

}  // namespace datamap
