#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace datamap {

enum class EntityType { Person, Location, Organization };

std::string_view entity_type_name(EntityType type);
std::optional<EntityType> parse_entity_type(std::string_view name);

/// One knowledge-snapshot record: the subset of a Wikidata item needed for
/// country resolution (P17/P19/P20/P27/P276/P159 and friends).
struct KbEntity {
  std::string qid;
  std::optional<EntityType> type;
  std::map<std::string, std::vector<std::string>> claims;  // Pnn -> value QIDs

  const std::vector<std::string>* claim(std::string_view property) const;
};

using KbFetcher = std::function<std::optional<KbEntity>(const std::string& qid)>;

/// Snapshot-first entity store. Lookup order: snapshot, on-disk cache,
/// remote fetcher. Fetched entities are appended to the cache file so the
/// next run resolves offline. Safe for concurrent lookups; cache writes are
/// serialized.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  void load_snapshot(const std::filesystem::path& path);
  void load_snapshot(std::istream& in, std::string_view source_name = "snapshot");

  /// Loads an existing cache file if present and appends future fetches to it.
  void attach_cache(const std::filesystem::path& cache_file);

  void set_fetcher(KbFetcher fetcher);

  void insert(KbEntity entity);  // snapshot-priority manual insert

  std::optional<KbEntity> lookup(const std::string& qid) const;

  std::size_t size() const;
  std::size_t fetched() const { return fetched_; }
  std::size_t duplicates() const { return duplicates_; }

 private:
  void load_stream(std::istream& in, std::string_view source_name, bool overwrite);
  void append_to_cache(const KbEntity& entity) const;

  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, KbEntity> entries_;  // lookup memoizes fetches
  std::filesystem::path cache_file_;
  mutable std::mutex cache_write_mutex_;
  KbFetcher fetcher_;
  mutable std::size_t fetched_ = 0;
  std::size_t duplicates_ = 0;
};

KbEntity parse_snapshot_record(std::string_view json_text);
std::string snapshot_record(const KbEntity& entity);

/// Converts a Wikidata Special:EntityData-style JSON document ({"entities":
/// {"Qnn": {...}}}) into a snapshot record, keeping only entity-valued
/// claims. Returns nullopt when the document has no such entry.
std::optional<KbEntity> entity_from_entitydata(std::string_view json_text,
                                               const std::string& qid);

}  // namespace datamap
