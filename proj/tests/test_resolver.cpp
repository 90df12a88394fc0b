#include <doctest.h>

#include <fstream>
#include <sstream>

#include "datamap/regression.hpp"
#include "datamap/resolver.hpp"
#include "datamap/text.hpp"
#include "helpers.hpp"

using namespace datamap;

namespace {

const char* kRegistry = R"(
{"qid":"Q36","iso3":"POL","region":"Europe","centroid":[52.0,20.0]}
{"qid":"Q183","iso3":"DEU","region":"Europe","centroid":[51.1,10.4]}
{"qid":"Q30","iso3":"USA","region":"Americas","centroid":[39.8,-98.6]}
{"qid":"Q924","iso3":"TZA","region":"Africa","centroid":[-6.3,34.8]}
{"qid":"Q114","iso3":"KEN","region":"Africa","centroid":[0.5,37.9]}
)";

const char* kSnapshot = R"(
{"qid":"Q619","type":"person","claims":{"P19":["Q47554"],"P20":["Q497115"],"P27":["Q1649871"]}}
{"qid":"Q937","type":"person","claims":{"P19":["Q3012"],"P20":["Q138518"]}}
{"qid":"Q47554","type":"location","claims":{"P17":["Q36"]}}
{"qid":"Q497115","type":"location","claims":{"P17":["Q36"]}}
{"qid":"Q1649871","type":"location","claims":{}}
{"qid":"Q3012","type":"location","claims":{"P17":["Q183"]}}
{"qid":"Q138518","type":"location","claims":{"P17":["Q30"]}}
{"qid":"Q555","type":"organization","claims":{"P159":["Q3012"],"P276":["Q138518"]}}
{"qid":"Q600","type":"location","claims":{"P17":["Q4444"]}}
{"qid":"Q4444","type":"location","claims":{}}
{"qid":"Q901","type":"location","claims":{"P17":["Q9020"]}}
{"qid":"Q7001","type":"location","claims":{"P17":["Q7002"]}}
{"qid":"Q7002","type":"location","claims":{"P17":["Q7001"]}}
{"qid":"Q800","type":"person","claims":{}}
)";

CountryRegistry registry() {
  std::istringstream in(kRegistry);
  return CountryRegistry::from_stream(in);
}

void load_kb(KnowledgeBase& out) {
  std::istringstream in(kSnapshot);
  out.load_snapshot(in);
}

}  // namespace

TEST_CASE("registry lookups and validation") {
  auto reg = registry();
  CHECK(reg.size() == 5);
  REQUIRE(reg.by_qid("Q36") != nullptr);
  CHECK(reg.by_qid("Q36")->iso3 == "POL");
  CHECK(reg.by_iso3("TZA")->qid == "Q924");
  CHECK(reg.by_qid("Q999") == nullptr);
  CHECK(reg.by_iso3("FRA") == nullptr);
  auto universe = reg.iso3_universe();
  CHECK(universe.front() == "DEU");  // sorted

  std::istringstream dup(
      "{\"qid\":\"Q36\",\"iso3\":\"POL\",\"region\":\"Europe\",\"centroid\":[0,0]}\n"
      "{\"qid\":\"Q37\",\"iso3\":\"POL\",\"region\":\"Europe\",\"centroid\":[0,0]}\n");
  CHECK_THROWS_AS(CountryRegistry::from_stream(dup), input_error);
  std::istringstream badlat(
      "{\"qid\":\"Q36\",\"iso3\":\"POL\",\"region\":\"Europe\",\"centroid\":[95,0]}\n");
  CHECK_THROWS_AS(CountryRegistry::from_stream(badlat), input_error);
}

TEST_CASE("snapshot loading rejects malformed records with line numbers") {
  KnowledgeBase bad;
  std::istringstream in("{\"qid\":\"Q1\",\"claims\":{\"P17\":[\"notaqid\"]}}\n");
  CHECK_THROWS_WITH_AS(bad.load_snapshot(in), doctest::Contains("line 1"), input_error);
}

TEST_CASE("resolve_place: Torun maps to Poland through P17") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  Resolution r = resolve_place("Q47554", base, reg);
  CHECK(r.outcome == Outcome::Countries);
  CHECK(r.countries == std::set<std::string>{"POL"});
}

TEST_CASE("resolve_place: a registered country qid maps to itself") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  Resolution r = resolve_place("Q36", base, reg);
  CHECK(r.outcome == Outcome::Countries);
  CHECK(r.countries == std::set<std::string>{"POL"});
}

TEST_CASE("resolve_place: unregistered-only P17 target means Historical") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  // Q600 -> P17 -> Q4444, which is known but not a registered country.
  Resolution r = resolve_place("Q600", base, reg);
  CHECK(r.outcome == Outcome::Historical);
  // Same when the P17 target is absent from the KB entirely: the chain still
  // terminated off the modern map.
  Resolution r2 = resolve_place("Q901", base, reg);
  CHECK(r2.outcome == Outcome::Historical);
}

TEST_CASE("resolve_place: kb miss stays Unresolved, never fatal") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  CHECK(resolve_place("Q424242", base, reg).outcome == Outcome::Unresolved);
}

TEST_CASE("resolve_place: P17 cycle terminates after one hop") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  // Q7001 P17 Q7002, Q7002 P17 Q7001. One hop only: target known but
  // unregistered -> Historical, no recursion.
  Resolution r = resolve_place("Q7001", base, reg);
  CHECK(r.outcome == Outcome::Historical);
}

TEST_CASE("resolve_entity: Copernicus links only to Poland") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  Resolution r = resolve_entity("Q619", EntityType::Person, base, reg);
  CHECK(r.outcome == Outcome::Countries);
  CHECK(r.countries == std::set<std::string>{"POL"});
}

TEST_CASE("resolve_entity: Einstein maps to Germany and the United States") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  Resolution r = resolve_entity("Q937", EntityType::Person, base, reg);
  CHECK(r.countries == std::set<std::string>{"DEU", "USA"});
}

TEST_CASE("resolve_entity: no relevant claims -> Unresolved") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  CHECK(resolve_entity("Q800", EntityType::Person, base, reg).outcome ==
        Outcome::Unresolved);
}

TEST_CASE("resolve_entity: organization rules use P276/P159") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  Resolution r = resolve_entity("Q555", EntityType::Organization, base, reg);
  CHECK(r.countries == std::set<std::string>{"DEU", "USA"});
}

TEST_CASE("resolve_entity: missing type hint unions all rule sets") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  // As a person Q555 has no P19/P20/P27; untyped resolution still reaches
  // its organization claims.
  CHECK(resolve_entity("Q555", std::nullopt, base, reg).countries ==
        std::set<std::string>{"DEU", "USA"});
  // A person typed as organization resolves nothing.
  CHECK(resolve_entity("Q619", EntityType::Organization, base, reg).outcome ==
        Outcome::Unresolved);
}

TEST_CASE("resolution is deterministic and repeatable") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  auto a = resolve_entity("Q619", EntityType::Person, base, reg);
  auto b = resolve_entity("Q619", EntityType::Person, base, reg);
  CHECK(a.outcome == b.outcome);
  CHECK(a.countries == b.countries);
}

namespace {

LinkedMention mention(const std::string& unit, const std::string& qid,
                      NerLabel label = NerLabel::Unknown) {
  LinkedMention m;
  m.unit_id = unit;
  m.surface = qid;
  m.begin = 0;
  m.end = 1;
  m.label = label;
  m.candidates.push_back(Candidate{qid, 1.0, 1});
  return m;
}

}  // namespace

TEST_CASE("dataset map: multi-country mention splits uniformly") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  std::vector<LinkedMention> mentions{mention("s1", "Q937", NerLabel::Per)};
  DatasetMap map = build_dataset_map(mentions, base, reg, "c", "de");
  CHECK(map.weights.at("DEU") == doctest::Approx(0.5));
  CHECK(map.weights.at("USA") == doctest::Approx(0.5));
  CHECK(map.mentions == 1);
}

TEST_CASE("dataset map: three single-country mentions accumulate") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  std::vector<LinkedMention> mentions{mention("s1", "Q47554", NerLabel::Loc),
                                      mention("s2", "Q47554", NerLabel::Loc),
                                      mention("s3", "Q497115", NerLabel::Loc)};
  DatasetMap map = build_dataset_map(mentions, base, reg, "c", "pl");
  CHECK(map.weights.at("POL") == doctest::Approx(3.0));
  CHECK(map.country_total() == doctest::Approx(3.0));
}

TEST_CASE("dataset map: historical and unresolved land in tallies") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  std::vector<LinkedMention> mentions{mention("s1", "Q600", NerLabel::Loc),
                                      mention("s2", "Q424242", NerLabel::Loc)};
  DatasetMap map = build_dataset_map(mentions, base, reg, "c", "x");
  CHECK(map.weights.empty());
  CHECK(map.historical == doctest::Approx(1.0));
  CHECK(map.unresolved == doctest::Approx(1.0));
  CHECK(map.country_total() + map.historical + map.unresolved ==
        doctest::Approx(static_cast<double>(map.mentions)).epsilon(1e-12));
}

TEST_CASE("dataset map: top-k falls through unresolved candidates") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  LinkedMention m;
  m.unit_id = "s1";
  m.surface = "x";
  m.begin = 0;
  m.end = 1;
  m.candidates = {Candidate{"Q424242", 0.9, 1}, Candidate{"Q47554", 0.5, 2}};
  std::vector<LinkedMention> one{m};

  MapOptions top1;
  top1.top_k = 1;
  DatasetMap first = build_dataset_map(one, base, reg, "c", "x", top1);
  CHECK(first.unresolved == doctest::Approx(1.0));

  MapOptions top2;
  top2.top_k = 2;
  DatasetMap second = build_dataset_map(one, base, reg, "c", "x", top2);
  CHECK(second.weights.at("POL") == doctest::Approx(1.0));
}

TEST_CASE("dataset map: resolution order independent of threading") {
  auto reg = registry();
  KnowledgeBase base;
  load_kb(base);
  std::vector<LinkedMention> mentions;
  for (int i = 0; i < 200; ++i) {
    const char* qids[] = {"Q937", "Q619", "Q600", "Q424242", "Q47554"};
    mentions.push_back(mention("s" + std::to_string(i), qids[i % 5]));
  }
  MapOptions serial;
  serial.threads = 1;
  MapOptions parallel;
  parallel.threads = 4;
  DatasetMap a = build_dataset_map(mentions, base, reg, "c", "x", serial);
  DatasetMap b = build_dataset_map(mentions, base, reg, "c", "x", parallel);
  CHECK(dataset_map_json(a) == dataset_map_json(b));
}

TEST_CASE("dataset map json round trip") {
  DatasetMap map;
  map.corpus_id = "c";
  map.language = "sw";
  map.weights = {{"TZA", 1.5}, {"KEN", 0.25}};
  map.historical = 2.0;
  map.unresolved = 1.0;
  map.mentions = 5;
  DatasetMap back = parse_dataset_map(dataset_map_json(map));
  CHECK(back.weights == map.weights);
  CHECK(back.historical == map.historical);
  CHECK(back.mentions == map.mentions);
}

TEST_CASE("conservation holds on randomized fixtures") {
  // Randomized KBs and mention lists; every mention must end up in exactly
  // one bucket.
  SplitMix64 rng(20240811);
  auto reg = registry();
  for (int trial = 0; trial < 50; ++trial) {
    KnowledgeBase base;
    std::ostringstream snapshot;
    int entities = 20 + static_cast<int>(rng.next() % 30);
    for (int e = 0; e < entities; ++e) {
      std::string qid = "Q" + std::to_string(100000 + e);
      switch (rng.next() % 4) {
        case 0:
          snapshot << R"({"qid":")" << qid << R"(","claims":{"P17":["Q36"]}})" << "\n";
          break;
        case 1:
          snapshot << R"({"qid":")" << qid
                   << R"(","claims":{"P17":["Q88888"]}})" << "\n";
          break;
        case 2:
          snapshot << R"({"qid":")" << qid
                   << R"(","claims":{"P19":["Q47554"],"P20":["Q138518"]},"type":"person"})"
                   << "\n";
          break;
        default:
          snapshot << R"({"qid":")" << qid << R"(","claims":{}})" << "\n";
          break;
      }
    }
    snapshot << kSnapshot;
    std::istringstream in(snapshot.str());
    base.load_snapshot(in);

    std::vector<LinkedMention> mentions;
    int count = 1 + static_cast<int>(rng.next() % 60);
    for (int i = 0; i < count; ++i) {
      std::string qid = rng.next() % 3 == 0
                            ? "Q" + std::to_string(rng.next() % 200000)
                            : "Q" + std::to_string(100000 + rng.next() % entities);
      mentions.push_back(mention("s" + std::to_string(i), qid));
    }
    DatasetMap map = build_dataset_map(mentions, base, reg, "c", "x");
    double total = map.country_total() + map.historical + map.unresolved;
    CHECK(std::abs(total - static_cast<double>(map.mentions)) < 1e-9);
  }
}

TEST_CASE("warm cache reproduces the cold-cache map byte for byte") {
  testutil::TempDir tmp;
  auto reg = registry();

  // The fetcher serves entities the snapshot lacks.
  auto fetcher = [](const std::string& qid) -> std::optional<KbEntity> {
    if (qid == "Q31000") {
      KbEntity e;
      e.qid = qid;
      e.claims["P17"] = {"Q36"};
      return e;
    }
    return std::nullopt;
  };

  std::vector<LinkedMention> mentions{mention("s1", "Q31000", NerLabel::Loc),
                                      mention("s2", "Q31999", NerLabel::Loc)};

  auto cache_file = tmp.file("kb_cache.jsonl");
  std::string cold_json, warm_json;
  std::size_t cold_fetches = 0, warm_fetches = 0;
  {
    KnowledgeBase base;
    std::istringstream in(R"({"qid":"Q1","claims":{}})");
    base.load_snapshot(in);
    base.attach_cache(cache_file);
    base.set_fetcher(fetcher);
    cold_json = dataset_map_json(build_dataset_map(mentions, base, reg, "c", "x"));
    cold_fetches = base.fetched();
  }
  {
    KnowledgeBase base;
    std::istringstream in(R"({"qid":"Q1","claims":{}})");
    base.load_snapshot(in);
    base.attach_cache(cache_file);
    base.set_fetcher(fetcher);
    warm_json = dataset_map_json(build_dataset_map(mentions, base, reg, "c", "x"));
    warm_fetches = base.fetched();
  }
  CHECK(cold_fetches == 1);
  CHECK(warm_fetches == 0);  // cache hit, no refetch
  CHECK(cold_json == warm_json);
}

TEST_CASE("snapshot entries shadow stale cache entries") {
  testutil::TempDir tmp;
  auto cache_file = tmp.file("kb_cache.jsonl");
  {
    std::ofstream out(cache_file);
    out << R"({"qid":"Q5","claims":{"P17":["Q30"]}})" << "\n";
  }
  KnowledgeBase base;
  std::istringstream in(R"({"qid":"Q5","claims":{"P17":["Q36"]}})");
  base.load_snapshot(in);
  base.attach_cache(cache_file);
  auto entity = base.lookup("Q5");
  REQUIRE(entity.has_value());
  CHECK(entity->claims.at("P17") == std::vector<std::string>{"Q36"});
}
