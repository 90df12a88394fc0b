#include "datamap/resolver.hpp"

#include <istream>
#include <iterator>
#include <thread>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

Resolution resolve_place(const std::string& qid, const KnowledgeBase& kb,
                         const CountryRegistry& registry) {
  if (const CountryInfo* country = registry.by_qid(qid))
    return {Outcome::Countries, {country->iso3}};
  auto entity = kb.lookup(qid);
  if (!entity) return {};
  Resolution res;
  bool historical_evidence = false;
  if (const auto* targets = entity->claim("P17")) {
    for (const auto& target : *targets) {
      if (const CountryInfo* country = registry.by_qid(target))
        res.countries.insert(country->iso3);
      else
        historical_evidence = true;
    }
  }
  if (!res.countries.empty())
    res.outcome = Outcome::Countries;
  else if (historical_evidence)
    res.outcome = Outcome::Historical;
  return res;
}

namespace {

constexpr const char* kPersonProps[] = {"P19", "P20", "P27"};
constexpr const char* kOrgProps[] = {"P276", "P159"};

// Feeds every value of the given properties through resolve_place,
// collecting countries and historical evidence.
void follow_chains(const KbEntity& entity, std::span<const char* const> props,
                   const KnowledgeBase& kb, const CountryRegistry& registry,
                   std::set<std::string>& countries, bool& historical_evidence) {
  for (const char* prop : props) {
    const auto* values = entity.claim(prop);
    if (!values) continue;
    for (const auto& value : *values) {
      Resolution r = resolve_place(value, kb, registry);
      switch (r.outcome) {
        case Outcome::Countries:
          countries.insert(r.countries.begin(), r.countries.end());
          break;
        case Outcome::Historical:
          historical_evidence = true;
          break;
        case Outcome::Unresolved:
          // A value that is known to the KB yet maps to no modern country
          // means the chain terminated off the modern map (a dissolved
          // polity, say). A KB miss is just a broken chain and contributes
          // nothing.
          if (kb.lookup(value)) historical_evidence = true;
          break;
      }
    }
  }
}

}  // namespace

Resolution resolve_entity(const std::string& qid, std::optional<EntityType> type_hint,
                          const KnowledgeBase& kb, const CountryRegistry& registry) {
  bool place_rules = !type_hint || type_hint == EntityType::Location;
  bool person_rules = !type_hint || type_hint == EntityType::Person;
  bool org_rules = !type_hint || type_hint == EntityType::Organization;

  std::set<std::string> countries;
  bool historical_evidence = false;

  if (place_rules) {
    Resolution r = resolve_place(qid, kb, registry);
    if (r.outcome == Outcome::Countries)
      countries.insert(r.countries.begin(), r.countries.end());
    else if (r.outcome == Outcome::Historical)
      historical_evidence = true;
  }

  if (person_rules || org_rules) {
    if (auto entity = kb.lookup(qid)) {
      if (person_rules)
        follow_chains(*entity, kPersonProps, kb, registry, countries,
                      historical_evidence);
      if (org_rules)
        follow_chains(*entity, kOrgProps, kb, registry, countries,
                      historical_evidence);
    }
  }

  Resolution res;
  res.countries = std::move(countries);
  if (!res.countries.empty())
    res.outcome = Outcome::Countries;
  else if (historical_evidence)
    res.outcome = Outcome::Historical;
  return res;
}

std::optional<EntityType> type_from_label(NerLabel label) {
  switch (label) {
    case NerLabel::Per: return EntityType::Person;
    case NerLabel::Loc: return EntityType::Location;
    case NerLabel::Org: return EntityType::Organization;
    case NerLabel::Other:
    case NerLabel::Unknown:
      return std::nullopt;  // untyped runs get the union of all rule sets
  }
  return std::nullopt;
}

double DatasetMap::country_total() const {
  double total = 0.0;
  for (const auto& [iso3, w] : weights) total += w;
  return total;
}

namespace {

Resolution resolve_one_mention(const LinkedMention& mention, const KnowledgeBase& kb,
                               const CountryRegistry& registry, int top_k) {
  auto hint = type_from_label(mention.label);
  int tried = 0;
  for (const auto& candidate : mention.candidates) {
    if (tried++ >= top_k) break;
    Resolution r = resolve_entity(candidate.qid, hint, kb, registry);
    if (r.outcome != Outcome::Unresolved) return r;
  }
  return {};
}

}  // namespace

std::vector<Resolution> resolve_mentions(std::span<const LinkedMention> mentions,
                                         const KnowledgeBase& kb,
                                         const CountryRegistry& registry,
                                         const MapOptions& options) {
  if (options.top_k < 1) throw input_error("top_k must be >= 1");
  int threads = std::max(1, options.threads);
  std::vector<Resolution> results(mentions.size());
  if (threads == 1 || mentions.size() < 2) {
    for (std::size_t i = 0; i < mentions.size(); ++i)
      results[i] = resolve_one_mention(mentions[i], kb, registry, options.top_k);
    return results;
  }
  std::vector<std::thread> workers;
  std::size_t chunk = (mentions.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::size_t begin = t * chunk;
    std::size_t end = std::min(mentions.size(), begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i)
        results[i] = resolve_one_mention(mentions[i], kb, registry, options.top_k);
    });
  }
  for (auto& w : workers) w.join();
  return results;
}

DatasetMap aggregate_resolutions(std::span<const Resolution> resolutions,
                                 std::string corpus_id, std::string language) {
  DatasetMap map;
  map.corpus_id = std::move(corpus_id);
  map.language = std::move(language);
  map.mentions = resolutions.size();
  // Fixed iteration order keeps the floating-point sums bit-stable across
  // thread counts.
  for (const Resolution& r : resolutions) {
    switch (r.outcome) {
      case Outcome::Countries: {
        double share = 1.0 / static_cast<double>(r.countries.size());
        for (const auto& iso3 : r.countries) map.weights[iso3] += share;
        break;
      }
      case Outcome::Historical:
        map.historical += 1.0;
        break;
      case Outcome::Unresolved:
        map.unresolved += 1.0;
        break;
    }
  }
  return map;
}

DatasetMap build_dataset_map(std::span<const LinkedMention> mentions,
                             const KnowledgeBase& kb, const CountryRegistry& registry,
                             std::string corpus_id, std::string language,
                             const MapOptions& options) {
  auto resolutions = resolve_mentions(mentions, kb, registry, options);
  return aggregate_resolutions(resolutions, std::move(corpus_id), std::move(language));
}

std::string dataset_map_json(const DatasetMap& map) {
  json doc;
  doc["corpus_id"] = map.corpus_id;
  doc["language"] = map.language;
  doc["weights"] = json::object();
  for (const auto& [iso3, w] : map.weights) doc["weights"][iso3] = w;
  doc["historical"] = map.historical;
  doc["unresolved"] = map.unresolved;
  doc["mentions"] = map.mentions;
  return doc.dump();
}

DatasetMap parse_dataset_map(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("bad dataset map: ") + e.what());
  }
  if (!doc.is_object()) throw input_error("dataset map must be a JSON object");
  DatasetMap map;
  if (doc.contains("corpus_id") && doc["corpus_id"].is_string())
    map.corpus_id = doc["corpus_id"].get<std::string>();
  if (doc.contains("language") && doc["language"].is_string())
    map.language = doc["language"].get<std::string>();
  if (doc.contains("weights")) {
    if (!doc["weights"].is_object())
      throw input_error("dataset map weights must be an object");
    for (const auto& [iso3, w] : doc["weights"].items()) {
      if (!w.is_number() || w.get<double>() < 0.0)
        throw input_error("dataset map weight for " + iso3 + " must be >= 0");
      map.weights[iso3] = w.get<double>();
    }
  }
  auto tally = [&](const char* key) -> double {
    if (!doc.contains(key)) return 0.0;
    if (!doc[key].is_number() || doc[key].get<double>() < 0.0)
      throw input_error(std::string("dataset map ") + key + " must be >= 0");
    return doc[key].get<double>();
  };
  map.historical = tally("historical");
  map.unresolved = tally("unresolved");
  if (doc.contains("mentions") && doc["mentions"].is_number_unsigned())
    map.mentions = doc["mentions"].get<std::size_t>();
  return map;
}

DatasetMap parse_dataset_map(std::istream& in) {
  return parse_dataset_map(std::string(std::istreambuf_iterator<char>(in),
                                       std::istreambuf_iterator<char>()));
}

}  // namespace datamap
