#include "datamap/remote_kb.hpp"

#include <httplib.h>

#include "datamap/text.hpp"

namespace datamap {

RemoteKb::RemoteKb(std::string endpoint, int timeout_ms) : timeout_ms_(timeout_ms) {
  if (endpoint.empty()) throw input_error("empty remote KB endpoint");
  // Split "scheme://host:port/base/path" into client target and base path.
  auto scheme_end = endpoint.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = endpoint.find('/', host_start);
  if (path_start == std::string::npos) {
    host_ = endpoint;
  } else {
    host_ = endpoint.substr(0, path_start);
    base_path_ = endpoint.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
}

std::optional<KbEntity> RemoteKb::fetch(const std::string& qid) const {
  if (!is_qid(qid)) return std::nullopt;
  httplib::Client client(host_);
  client.set_connection_timeout(0, timeout_ms_ * 1000);
  client.set_read_timeout(0, timeout_ms_ * 1000);
  client.set_follow_location(true);
  auto res = client.Get(base_path_ + "/" + qid + ".json");
  if (!res || res->status != 200) return std::nullopt;
  if (auto entity = entity_from_entitydata(res->body, qid)) return entity;
  try {
    KbEntity entity = parse_snapshot_record(res->body);
    if (entity.qid != qid) return std::nullopt;
    return entity;
  } catch (const input_error&) {
    return std::nullopt;
  }
}

KbFetcher RemoteKb::fetcher() const {
  return [*this](const std::string& qid) { return fetch(qid); };
}

}  // namespace datamap
