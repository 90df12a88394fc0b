#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "datamap/ingest.hpp"
#include "datamap/kb.hpp"
#include "datamap/registry.hpp"

namespace datamap {

enum class Outcome { Countries, Historical, Unresolved };

struct Resolution {
  Outcome outcome = Outcome::Unresolved;
  std::set<std::string> countries;  // iso3, non-empty iff outcome == Countries
};

/// Identity plus one P17 hop: a QID that is itself a registered country maps
/// to it; otherwise each P17 value is checked against the registry. P17
/// targets outside the registry are historical evidence; no further hops.
Resolution resolve_place(const std::string& qid, const KnowledgeBase& kb,
                         const CountryRegistry& registry);

/// Type-conditioned property chains: person -> P19/P20/P27, location ->
/// identity + P17, organization -> P276/P159. Without a type hint all three
/// rule sets apply. Reached countries are unioned; a chain ending only at
/// unregistered polities yields Historical; no usable chain, Unresolved.
Resolution resolve_entity(const std::string& qid, std::optional<EntityType> type_hint,
                          const KnowledgeBase& kb, const CountryRegistry& registry);

std::optional<EntityType> type_from_label(NerLabel label);

/// Per-country fractional entity mass for one corpus/language plus the
/// historical/unresolved tallies. Conservation: country weight total +
/// historical + unresolved == mentions.
struct DatasetMap {
  std::string corpus_id;
  std::string language;
  std::map<std::string, double> weights;  // iso3 -> mass
  double historical = 0.0;
  double unresolved = 0.0;
  std::size_t mentions = 0;

  double country_total() const;
};

struct MapOptions {
  int top_k = 1;    // candidates tried per mention, in rank order
  int threads = 1;  // parallel resolution; aggregation order is fixed
};

/// One resolution per mention: the first candidate among the top-k whose
/// outcome is not Unresolved wins; all-Unresolved stays Unresolved.
std::vector<Resolution> resolve_mentions(std::span<const LinkedMention> mentions,
                                         const KnowledgeBase& kb,
                                         const CountryRegistry& registry,
                                         const MapOptions& options = {});

DatasetMap build_dataset_map(std::span<const LinkedMention> mentions,
                             const KnowledgeBase& kb, const CountryRegistry& registry,
                             std::string corpus_id, std::string language,
                             const MapOptions& options = {});

DatasetMap aggregate_resolutions(std::span<const Resolution> resolutions,
                                 std::string corpus_id, std::string language);

std::string dataset_map_json(const DatasetMap& map);
DatasetMap parse_dataset_map(std::istream& in);
DatasetMap parse_dataset_map(const std::string& json_text);

}  // namespace datamap
