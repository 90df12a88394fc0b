#include "datamap/kb.hpp"

#include <fstream>
#include <istream>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

std::string_view entity_type_name(EntityType type) {
  switch (type) {
    case EntityType::Person: return "person";
    case EntityType::Location: return "location";
    case EntityType::Organization: return "organization";
  }
  return "location";
}

std::optional<EntityType> parse_entity_type(std::string_view name) {
  if (name == "person") return EntityType::Person;
  if (name == "location") return EntityType::Location;
  if (name == "organization") return EntityType::Organization;
  return std::nullopt;
}

const std::vector<std::string>* KbEntity::claim(std::string_view property) const {
  auto it = claims.find(std::string(property));
  return it == claims.end() ? nullptr : &it->second;
}

namespace {

KbEntity entity_from_json(const json& rec) {
  if (!rec.is_object()) throw input_error("snapshot record must be an object");
  KbEntity e;
  if (!rec.contains("qid") || !rec["qid"].is_string() ||
      !is_qid(e.qid = rec["qid"].get<std::string>()))
    throw input_error("snapshot record has a bad qid");
  if (auto it = rec.find("type"); it != rec.end() && it->is_string())
    e.type = parse_entity_type(it->get<std::string>());
  if (auto it = rec.find("claims"); it != rec.end()) {
    if (!it->is_object()) throw input_error("snapshot claims must be an object");
    for (const auto& [prop, values] : it->items()) {
      if (!is_pid(prop)) throw input_error("bad property id: " + prop);
      if (!values.is_array()) throw input_error("claim values must be an array: " + prop);
      std::vector<std::string> list;
      for (const auto& v : values) {
        if (!v.is_string() || !is_qid(v.get<std::string>()))
          throw input_error("bad claim value under " + prop);
        list.push_back(v.get<std::string>());
      }
      e.claims.emplace(prop, std::move(list));
    }
  }
  return e;
}

}  // namespace

KbEntity parse_snapshot_record(std::string_view json_text) {
  json rec;
  try {
    rec = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("bad snapshot record: ") + e.what());
  }
  return entity_from_json(rec);
}

std::string snapshot_record(const KbEntity& entity) {
  json rec;
  rec["qid"] = entity.qid;
  if (entity.type) rec["type"] = entity_type_name(*entity.type);
  json claims = json::object();
  for (const auto& [prop, values] : entity.claims) claims[prop] = values;
  rec["claims"] = std::move(claims);
  return rec.dump();
}

void KnowledgeBase::load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open snapshot file: " + path.string());
  load_snapshot(in, path.string());
}

void KnowledgeBase::load_snapshot(std::istream& in, std::string_view source_name) {
  load_stream(in, source_name, /*overwrite=*/true);
}

void KnowledgeBase::load_stream(std::istream& in, std::string_view source_name,
                                bool overwrite) {
  std::string line;
  std::size_t line_no = 0;
  std::unique_lock lock(mutex_);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    KbEntity e;
    try {
      e = parse_snapshot_record(line);
    } catch (const input_error& err) {
      throw input_error(std::string(source_name) + " line " +
                        std::to_string(line_no) + ": " + err.what());
    }
    auto [it, inserted] = entries_.try_emplace(e.qid, e);
    if (!inserted) {
      ++duplicates_;
      if (overwrite) it->second = std::move(e);
    }
  }
}

void KnowledgeBase::attach_cache(const std::filesystem::path& cache_file) {
  cache_file_ = cache_file;
  std::ifstream in(cache_file);
  if (in) {
    // Cache entries never shadow snapshot entries; the snapshot stays
    // authoritative when both contain a QID.
    load_stream(in, cache_file.string(), /*overwrite=*/false);
  }
}

void KnowledgeBase::set_fetcher(KbFetcher fetcher) { fetcher_ = std::move(fetcher); }

void KnowledgeBase::insert(KbEntity entity) {
  std::unique_lock lock(mutex_);
  entries_[entity.qid] = std::move(entity);
}

std::optional<KbEntity> KnowledgeBase::lookup(const std::string& qid) const {
  {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(qid);
    if (it != entries_.end()) return it->second;
  }
  if (!fetcher_) return std::nullopt;
  auto fetched = fetcher_(qid);
  if (!fetched) return std::nullopt;
  {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = entries_.try_emplace(qid, *fetched);
    if (!inserted) return it->second;  // another thread fetched it first
    ++fetched_;
  }
  append_to_cache(*fetched);
  return fetched;
}

void KnowledgeBase::append_to_cache(const KbEntity& entity) const {
  if (cache_file_.empty()) return;
  std::scoped_lock lock(cache_write_mutex_);
  std::ofstream out(cache_file_, std::ios::app);
  if (!out) throw input_error("cannot append to cache file: " + cache_file_.string());
  out << snapshot_record(entity) << '\n';
}

std::size_t KnowledgeBase::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::optional<KbEntity> entity_from_entitydata(std::string_view json_text,
                                               const std::string& qid) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
  if (!doc.is_object() || !doc.contains("entities")) return std::nullopt;
  const json& entities = doc["entities"];
  if (!entities.is_object() || !entities.contains(qid)) return std::nullopt;
  const json& entity = entities[qid];
  KbEntity out;
  out.qid = qid;
  if (!entity.is_object() || !entity.contains("claims") || !entity["claims"].is_object())
    return out;
  for (const auto& [prop, statements] : entity["claims"].items()) {
    if (!is_pid(prop) || !statements.is_array()) continue;
    std::vector<std::string> values;
    for (const auto& st : statements) {
      // mainsnak.datavalue.value.id holds the target QID for
      // wikibase-entityid values; other datatypes are skipped.
      if (!st.is_object()) continue;
      const json* v = &st;
      for (const char* key : {"mainsnak", "datavalue", "value"}) {
        if (!v->is_object() || !v->contains(key)) {
          v = nullptr;
          break;
        }
        v = &(*v)[key];
      }
      if (v && v->is_object() && v->contains("id") && (*v)["id"].is_string()) {
        std::string id = (*v)["id"].get<std::string>();
        if (is_qid(id)) values.push_back(std::move(id));
      }
    }
    if (!values.empty()) out.claims.emplace(prop, std::move(values));
  }
  return out;
}

}  // namespace datamap
