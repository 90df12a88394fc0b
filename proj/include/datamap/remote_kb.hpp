#pragma once

#include <optional>
#include <string>

#include "datamap/kb.hpp"

namespace datamap {

/// HTTP client for filling snapshot gaps. Issues GET {base_path}/{qid}.json
/// against the configured host and accepts either a snapshot-format record
/// or a Wikidata Special:EntityData document. Failures (network, status,
/// parse) resolve to nullopt; the entity then counts as unresolved.
class RemoteKb {
 public:
  /// endpoint: "http://host[:port][/base/path]"
  RemoteKb(std::string endpoint, int timeout_ms = 5000);

  std::optional<KbEntity> fetch(const std::string& qid) const;

  /// Adapter usable as KnowledgeBase fetcher.
  KbFetcher fetcher() const;

 private:
  std::string host_;  // scheme://host:port
  std::string base_path_;
  int timeout_ms_;
};

}  // namespace datamap
