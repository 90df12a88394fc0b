#include "datamap/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "datamap/consistency.hpp"
#include "datamap/factors.hpp"
#include "datamap/ingest.hpp"
#include "datamap/kb.hpp"
#include "datamap/regression.hpp"
#include "datamap/registry.hpp"
#include "datamap/remote_kb.hpp"
#include "datamap/render.hpp"
#include "datamap/report.hpp"
#include "datamap/resolver.hpp"
#include "datamap/stats.hpp"
#include "datamap/text.hpp"
#include "datamap/version.hpp"

namespace datamap::cli {

using nlohmann::json;

namespace {

std::string read_input(const std::string& path) {
  if (path == "-")
    return std::string(std::istreambuf_iterator<char>(std::cin),
                       std::istreambuf_iterator<char>());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open input file: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& content,
                  std::ostream& out) {
  if (path == "-" || path.empty()) {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw input_error("cannot open output file: " + path);
  file << content;
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open file: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

LanguageProfile load_profile(const std::string& path) {
  return LanguageProfile::parse(slurp_file(path));
}

DatasetMap load_map(const std::string& path) {
  return parse_dataset_map(read_input(path));
}

void emit_summary(std::ostream& err, const json& summary) {
  err << json{{"summary", summary}}.dump() << '\n';
}

struct IngestConfig {
  std::string format;
  std::string in;
  std::string out;
  std::string units_out;
  std::string language = "und";
  std::string corpus_id = "corpus";
  std::string text_field = "question";
  bool dedupe = false;
};

int run_ingest(const IngestConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string data = read_input(cfg.in);
  std::istringstream stream(data);
  if (cfg.format == "conll") {
    ConllResult parsed = parse_conll(stream, cfg.language, cfg.corpus_id);
    std::ostringstream mentions;
    write_links_jsonl(parsed.mentions, mentions);
    write_output(cfg.out, mentions.str(), out);
    if (!cfg.units_out.empty()) {
      std::ostringstream units;
      write_units_jsonl(parsed.units, units);
      write_output(cfg.units_out, units.str(), out);
    }
    emit_summary(err, {{"units", parsed.units.size()},
                       {"mentions", parsed.mentions.size()},
                       {"orphan_continuations", parsed.orphan_continuations},
                       {"unknown_tags", parsed.unknown_tags}});
  } else if (cfg.format == "qa-json") {
    QaOptions options;
    options.text_field = cfg.text_field;
    options.dedupe = cfg.dedupe;
    QaResult parsed = parse_qa_json(stream, cfg.language, cfg.corpus_id, options);
    std::ostringstream units;
    write_units_jsonl(parsed.units, units);
    write_output(cfg.out, units.str(), out);
    emit_summary(err, {{"units", parsed.units.size()},
                       {"skipped", parsed.skipped},
                       {"duplicates", parsed.duplicates}});
  } else if (cfg.format == "links") {
    LinksResult parsed = parse_links_jsonl(stream);
    std::ostringstream mentions;
    write_links_jsonl(parsed.mentions, mentions);
    write_output(cfg.out, mentions.str(), out);
    emit_summary(err, {{"mentions", parsed.mentions.size()},
                       {"rejected", parsed.rejected}});
  } else {
    throw input_error("unknown ingest format: " + cfg.format);
  }
  return 0;
}

struct ResolveConfig {
  std::string in;
  std::string links;
  std::string kb_path;
  std::string registry_path;
  std::string out;
  std::string unit_regions_out;
  std::string corpus_id = "corpus";
  std::string language = "und";
  std::string cache_dir;
  std::string kb_endpoint;
  int kb_timeout_ms = 5000;
  int top_k = 1;
  int threads = 1;
};

// Attaches external linker candidates to span-only mentions, matching on
// (unit_id, span). Mentions that already carry candidates pass through.
std::size_t join_links(std::vector<LinkedMention>& mentions,
                       const std::vector<LinkedMention>& links) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>, const LinkedMention*>
      by_key;
  for (const auto& link : links)
    by_key.emplace(std::tuple{link.unit_id, link.begin, link.end}, &link);
  std::size_t joined = 0;
  for (auto& mention : mentions) {
    if (!mention.candidates.empty()) continue;
    auto it = by_key.find({mention.unit_id, mention.begin, mention.end});
    if (it == by_key.end()) continue;
    mention.candidates = it->second->candidates;
    if (mention.label == NerLabel::Unknown) mention.label = it->second->label;
    ++joined;
  }
  return joined;
}

int run_resolve(const ResolveConfig& cfg, std::ostream& out, std::ostream& err) {
  CountryRegistry registry = CountryRegistry::load(cfg.registry_path);
  KnowledgeBase kb;
  kb.load_snapshot(cfg.kb_path);
  if (!cfg.cache_dir.empty()) {
    std::filesystem::create_directories(cfg.cache_dir);
    kb.attach_cache(std::filesystem::path(cfg.cache_dir) / "kb_cache.jsonl");
  }
  std::optional<RemoteKb> remote;
  if (!cfg.kb_endpoint.empty()) {
    remote.emplace(cfg.kb_endpoint, cfg.kb_timeout_ms);
    kb.set_fetcher(remote->fetcher());
  }

  std::istringstream stream(read_input(cfg.in));
  LinksOptions lenient;
  lenient.allow_missing_candidates = true;  // span-only mentions join via --links
  LinksResult parsed = parse_links_jsonl(stream, lenient);
  std::size_t joined = 0;
  if (!cfg.links.empty()) {
    std::istringstream links_stream(slurp_file(cfg.links));
    LinksResult links = parse_links_jsonl(links_stream);
    joined = join_links(parsed.mentions, links.mentions);
  }

  MapOptions options;
  options.top_k = cfg.top_k;
  options.threads = cfg.threads;
  auto resolutions = resolve_mentions(parsed.mentions, kb, registry, options);
  DatasetMap map =
      aggregate_resolutions(resolutions, cfg.corpus_id, cfg.language);
  write_output(cfg.out, dataset_map_json(map) + "\n", out);

  if (!cfg.unit_regions_out.empty()) {
    // Region sets per unit, from the resolved countries of its mentions.
    std::map<std::string, std::vector<std::string>> unit_regions;
    for (std::size_t i = 0; i < parsed.mentions.size(); ++i) {
      const auto& unit = parsed.mentions[i].unit_id;
      unit_regions.try_emplace(unit);
      const Resolution& r = resolutions[i];
      if (r.outcome == Outcome::Countries) {
        for (const auto& iso3 : r.countries) {
          const CountryInfo* info = registry.by_iso3(iso3);
          if (info)
            unit_regions[unit].push_back(std::string(region_name(info->region)));
        }
      } else if (r.outcome == Outcome::Historical) {
        unit_regions[unit].push_back(std::string(kHistoryCategory));
      }
    }
    std::ostringstream lines;
    for (const auto& [unit, regions] : unit_regions)
      lines << json{{"item_id", unit}, {"regions", regions}}.dump() << '\n';
    write_output(cfg.unit_regions_out, lines.str(), out);
  }

  emit_summary(err, {{"mentions", map.mentions},
                     {"resolved", map.country_total()},
                     {"historical", map.historical},
                     {"unresolved", map.unresolved},
                     {"rejected_records", parsed.rejected},
                     {"joined_links", joined},
                     {"fetched", kb.fetched()}});
  return 0;
}

struct ReportConfig {
  std::string in;
  std::string out;
  std::string registry_path;
  std::string profile_path;
  double threshold = 0.0;
  bool reproducible = false;
  bool gini_restricted = false;
};

int run_report(const ReportConfig& cfg, std::ostream& out, std::ostream&) {
  CountryRegistry registry = CountryRegistry::load(cfg.registry_path);
  DatasetMap map = load_map(cfg.in);
  std::optional<LanguageProfile> profile;
  if (!cfg.profile_path.empty()) profile = load_profile(cfg.profile_path);
  ReportOptions options;
  options.threshold = cfg.threshold;
  options.reproducible = cfg.reproducible;
  options.gini_restricted = cfg.gini_restricted;
  std::string report =
      emit_report(map, profile ? &*profile : nullptr, registry, options);
  write_output(cfg.out, report, out);
  return 0;
}

struct FactorsConfig {
  std::string map_path;
  std::string table_path;
  std::string registry_path;
  std::string profile_path;
  std::string out;
  std::string features = "pop+gdp+gdppc+land+geo";
  int folds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  bool positive_only = false;
};

int run_factors(const FactorsConfig& cfg, std::ostream& out, std::ostream& err) {
  CountryRegistry registry = CountryRegistry::load(cfg.registry_path);
  DatasetMap map = load_map(cfg.map_path);
  FactorTable table = FactorTable::load(cfg.table_path);
  std::optional<LanguageProfile> profile;
  if (!cfg.profile_path.empty()) profile = load_profile(cfg.profile_path);
  std::vector<Feature> features = parse_features(cfg.features);

  DesignOptions design_options;
  design_options.positive_only = cfg.positive_only;
  Design design = build_design(map, table, profile ? &*profile : nullptr, features,
                               registry, design_options);

  CvOptions cv;
  cv.folds = cfg.folds;
  cv.seed = cfg.seed;
  cv.threads = cfg.threads;
  RegressionResult result = cross_validate(design.x, design.y, cv);
  write_output(cfg.out, regression_result_json(result, features) + "\n", out);
  emit_summary(err, {{"rows", design.countries.size()},
                     {"excluded_rows", design.excluded_rows}});
  return 0;
}

struct CompareConfig {
  std::string metric;
  std::string a;
  std::string b;
  std::string pairs;
  std::string gold;
  std::string predicted;
  int k = 10;
  double p = 0.9;
  std::string variant = "ext";
  std::string denominator = "relaxed";
};

std::vector<std::string> load_ranking(const std::string& path) {
  json doc;
  try {
    doc = json::parse(slurp_file(path));
  } catch (const json::parse_error& e) {
    throw input_error("bad ranking file " + path + ": " + e.what());
  }
  if (doc.is_array()) {
    std::vector<std::string> ranking;
    for (const auto& v : doc) {
      if (!v.is_string()) throw input_error("ranking array must hold strings: " + path);
      ranking.push_back(v.get<std::string>());
    }
    return ranking;
  }
  if (doc.is_object() && doc.contains("ranking") && doc["ranking"].is_array()) {
    std::vector<std::string> ranking;
    for (const auto& v : doc["ranking"]) ranking.push_back(v.get<std::string>());
    return ranking;
  }
  if (doc.is_object() && doc.contains("weights"))
    return country_ranking(parse_dataset_map(doc.dump()));
  throw input_error("ranking file must be an array, {\"ranking\":[...]}, or a dataset map: " +
                    path);
}

int run_compare(const CompareConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.metric == "rbo") {
    auto a = load_ranking(cfg.a);
    auto b = load_ranking(cfg.b);
    RboVariant variant = cfg.variant == "min" ? RboVariant::Min
                                              : RboVariant::Extrapolated;
    if (cfg.variant != "min" && cfg.variant != "ext")
      throw input_error("rbo variant must be ext or min");
    out << json(rbo(a, b, cfg.p, cfg.k, variant)).dump() << '\n';
  } else if (cfg.metric == "agreement") {
    std::istringstream a_stream(slurp_file(cfg.a));
    std::istringstream b_stream(slurp_file(cfg.b));
    RunOutput informed = parse_run_jsonl(a_stream);
    RunOutput relaxed = parse_run_jsonl(b_stream);
    AgreementDenominator denom;
    if (cfg.denominator == "relaxed")
      denom = AgreementDenominator::RelaxedTotal;
    else if (cfg.denominator == "informed")
      denom = AgreementDenominator::InformedTotal;
    else
      throw input_error("agreement denominator must be relaxed or informed");
    Agreement agg = agreement_at_k(informed, relaxed, cfg.k, denom);
    out << json{{"common", agg.common},
                {"relaxed_only", agg.relaxed_only},
                {"informed_total", agg.informed_total},
                {"ratio", agg.ratio},
                {"units", agg.units},
                {"coverage_warnings", agg.coverage_warnings}}
               .dump()
        << '\n';
  } else if (cfg.metric == "el-consistency") {
    std::istringstream pairs_stream(slurp_file(cfg.pairs));
    auto pairs = parse_pairs_jsonl(pairs_stream);
    ElConsistency result = el_consistency(pairs, cfg.k);
    out << json(result.percentage).dump() << '\n';
  } else if (cfg.metric == "projection-prf") {
    std::istringstream gold_stream(slurp_file(cfg.gold));
    std::istringstream pred_stream(slurp_file(cfg.predicted));
    auto gold = parse_conll_label_sequence(gold_stream);
    auto pred = parse_conll_label_sequence(pred_stream);
    Prf prf = projection_prf(gold, pred);
    out << json{{"precision", prf.precision},
                {"recall", prf.recall},
                {"f1", prf.f1},
                {"tp", prf.tp},
                {"fp", prf.fp},
                {"fn", prf.fn}}
               .dump()
        << '\n';
  } else {
    throw input_error("unknown compare metric: " + cfg.metric);
  }
  return 0;
}

struct RegionsConfig {
  std::string map_path;
  std::string registry_path;
  std::string scores_path;
  std::string item_regions_path;
  std::string mode = "each";
  std::string out;
};

int run_regions(const RegionsConfig& cfg, std::ostream& out, std::ostream&) {
  if (!cfg.scores_path.empty() || !cfg.item_regions_path.empty()) {
    if (cfg.scores_path.empty() || cfg.item_regions_path.empty())
      throw input_error("region performance needs both --scores and --item-regions");
    std::map<std::string, double> scores;
    {
      std::istringstream stream(slurp_file(cfg.scores_path));
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
          rec = json::parse(line);
        } catch (const json::parse_error& e) {
          throw input_error("scores line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("item_id") || !rec.contains("score") ||
            !rec["score"].is_number())
          throw input_error("scores line " + std::to_string(line_no) +
                            ": need item_id and numeric score");
        std::string item = rec["item_id"].is_string() ? rec["item_id"].get<std::string>()
                                                      : rec["item_id"].dump();
        scores[item] = rec["score"].get<double>();
      }
    }
    std::map<std::string, std::vector<std::string>> item_regions;
    {
      std::istringstream stream(slurp_file(cfg.item_regions_path));
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
          rec = json::parse(line);
        } catch (const json::parse_error& e) {
          throw input_error("item-regions line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        if (!rec.is_object() || !rec.contains("item_id") || !rec.contains("regions") ||
            !rec["regions"].is_array())
          throw input_error("item-regions line " + std::to_string(line_no) +
                            ": need item_id and a regions array");
        std::string item = rec["item_id"].is_string() ? rec["item_id"].get<std::string>()
                                                      : rec["item_id"].dump();
        std::vector<std::string> regions;
        for (const auto& r : rec["regions"]) regions.push_back(r.get<std::string>());
        item_regions[item] = std::move(regions);
      }
    }
    MultiRegionMode mode;
    if (cfg.mode == "each")
      mode = MultiRegionMode::Each;
    else if (cfg.mode == "dominant")
      mode = MultiRegionMode::Dominant;
    else
      throw input_error("region mode must be each or dominant");
    RegionBreakdown breakdown = region_performance(scores, item_regions, mode);
    json means = json::object(), counts = json::object();
    for (const auto& [region, mean] : breakdown.means) means[region] = mean;
    for (const auto& [region, count] : breakdown.counts) counts[region] = count;
    write_output(cfg.out,
                 json{{"means", means},
                      {"counts", counts},
                      {"macro_stdev", breakdown.macro_stdev},
                      {"skipped_items", breakdown.skipped_items}}
                         .dump() +
                     "\n",
                 out);
    return 0;
  }

  if (cfg.map_path.empty())
    throw input_error("regions needs either --map or --scores/--item-regions");
  CountryRegistry registry = CountryRegistry::load(cfg.registry_path);
  DatasetMap map = load_map(cfg.map_path);
  json rollup = json::object();
  for (const auto& [region, w] : region_rollup(map, registry)) rollup[region] = w;
  write_output(cfg.out, rollup.dump() + "\n", out);
  return 0;
}

struct RenderConfig {
  std::string map_path;
  std::string geometry_path;
  std::string profile_path;
  std::string out;
  std::string scale = "log";
  bool bars = false;
  std::size_t top_k = 10;
};

int run_render(const RenderConfig& cfg, std::ostream& out, std::ostream&) {
  DatasetMap map = load_map(cfg.map_path);
  if (cfg.bars) {
    if (cfg.profile_path.empty()) throw input_error("--bars needs --profile");
    LanguageProfile profile = load_profile(cfg.profile_path);
    SpeakerComparison cmp = speaker_comparison(map, profile);
    BarsOptions options;
    options.top_k = cfg.top_k;
    options.title = map.corpus_id + " (" + map.language + "): dataset vs speakers";
    write_output(cfg.out, emit_bars(cmp, options), out);
    return 0;
  }
  if (cfg.geometry_path.empty()) throw input_error("render needs --geometry");
  WorldGeometry geometry = WorldGeometry::load(cfg.geometry_path);
  ChoroplethOptions options;
  if (cfg.scale == "log")
    options.scale = ColorScale::Log;
  else if (cfg.scale == "linear")
    options.scale = ColorScale::Linear;
  else
    throw input_error("scale must be log or linear");
  write_output(cfg.out, emit_choropleth(map, geometry, options), out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dataset geography toolkit: map corpora onto countries and "
               "measure representativeness", "datamap"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  IngestConfig ingest_cfg;
  auto* ingest = app.add_subcommand(
      "ingest", "Parse a corpus (conll, qa-json, links) into units/mentions");
  ingest->add_option("--format", ingest_cfg.format, "Input format: conll, qa-json, links")
      ->required();
  ingest->add_option("--in", ingest_cfg.in, "Input file (- for stdin)")->required();
  ingest->add_option("--out", ingest_cfg.out, "Output file (- for stdout)")->required();
  ingest->add_option("--units-out", ingest_cfg.units_out,
                     "Also write text units here (conll)");
  ingest->add_option("--lang", ingest_cfg.language, "BCP-47-style language code");
  ingest->add_option("--corpus-id", ingest_cfg.corpus_id, "Corpus identifier");
  ingest->add_option("--text-field", ingest_cfg.text_field,
                     "Record field holding the text (qa-json)")
      ->capture_default_str();
  ingest->add_flag("--dedupe", ingest_cfg.dedupe,
                   "Drop units repeating an earlier unit's text (qa-json)");

  ResolveConfig resolve_cfg;
  auto* resolve = app.add_subcommand(
      "resolve", "Resolve mention candidates to countries and build a dataset map");
  resolve->add_option("--in", resolve_cfg.in, "Mentions jsonl (- for stdin)")->required();
  resolve->add_option("--links", resolve_cfg.links,
                      "External linker output joined onto span-only mentions");
  resolve->add_option("--kb", resolve_cfg.kb_path, "Knowledge snapshot jsonl")->required();
  resolve->add_option("--registry", resolve_cfg.registry_path, "Country registry jsonl")
      ->required();
  resolve->add_option("--out", resolve_cfg.out, "Dataset map output (- for stdout)")
      ->required();
  resolve->add_option("--unit-regions-out", resolve_cfg.unit_regions_out,
                      "Per-unit region sets jsonl (for the regions subcommand)");
  resolve->add_option("--corpus-id", resolve_cfg.corpus_id, "Corpus identifier")
      ->capture_default_str();
  resolve->add_option("--lang", resolve_cfg.language, "Language code")
      ->capture_default_str();
  resolve->add_option("--top-k", resolve_cfg.top_k,
                      "Candidates tried per mention, in rank order")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  resolve->add_option("--threads", resolve_cfg.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  resolve->add_option("--cache-dir", resolve_cfg.cache_dir,
                      "Cache directory for fetched entities")
      ->envname("DATAMAP_CACHE_DIR");
  resolve->add_option("--kb-endpoint", resolve_cfg.kb_endpoint,
                      "Remote entity endpoint (GET <endpoint>/<qid>.json)")
      ->envname("DATAMAP_KB_ENDPOINT");
  resolve->add_option("--kb-timeout-ms", resolve_cfg.kb_timeout_ms,
                      "Remote fetch timeout in milliseconds")
      ->envname("DATAMAP_KB_TIMEOUT_MS")
      ->capture_default_str();

  ReportConfig report_cfg;
  auto* report = app.add_subcommand("report",
                                    "Emit the representativeness report for a map");
  report->add_option("--in", report_cfg.in, "Dataset map json")->required();
  report->add_option("--out", report_cfg.out, "Report output (- for stdout)")->required();
  report->add_option("--registry", report_cfg.registry_path, "Country registry jsonl")
      ->required();
  report->add_option("--profile", report_cfg.profile_path, "Language profile json");
  report->add_option("--threshold", report_cfg.threshold,
                     "Unrepresented-country weight threshold")
      ->capture_default_str();
  report->add_flag("--reproducible", report_cfg.reproducible,
                   "Omit generated_at so output bytes are stable");
  report->add_flag("--gini-restricted", report_cfg.gini_restricted,
                   "Compute gini over weighted countries only, not the registry");

  FactorsConfig factors_cfg;
  auto* factors = app.add_subcommand(
      "factors", "Cross-validate the socioeconomic regression on a dataset map");
  factors->add_option("--map", factors_cfg.map_path, "Dataset map json")->required();
  factors->add_option("--table", factors_cfg.table_path, "Factor table csv")->required();
  factors->add_option("--registry", factors_cfg.registry_path, "Country registry jsonl")
      ->required();
  factors->add_option("--profile", factors_cfg.profile_path,
                      "Language profile json (needed for the geo factor)");
  factors->add_option("--features,--factors", factors_cfg.features,
                      "`+`-separated factors: pop, gdp, gdppc, land, geo")
      ->capture_default_str();
  factors->add_option("--folds", factors_cfg.folds, "Cross-validation folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  factors->add_option("--seed", factors_cfg.seed, "Shuffle seed")->capture_default_str();
  factors->add_option("--threads", factors_cfg.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  factors->add_flag("--positive-only", factors_cfg.positive_only,
                    "Regress ln(count) over positively weighted countries only");
  factors->add_option("--out", factors_cfg.out, "Result output (- for stdout)")
      ->capture_default_str();

  CompareConfig compare_cfg;
  auto* compare = app.add_subcommand(
      "compare", "Compare two linking runs or rankings (rbo, agreement, "
                 "el-consistency, projection-prf)");
  compare->add_option("--metric", compare_cfg.metric,
                      "rbo, agreement, el-consistency, projection-prf")
      ->required();
  compare->add_option("--a", compare_cfg.a, "First input (ranking or run jsonl)");
  compare->add_option("--b", compare_cfg.b, "Second input");
  compare->add_option("--pairs", compare_cfg.pairs, "Parallel pairs jsonl");
  compare->add_option("--gold", compare_cfg.gold, "Gold/projected conll labels");
  compare->add_option("--pred", compare_cfg.predicted, "Predicted conll labels");
  compare->add_option("--k", compare_cfg.k, "Top-k depth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare->add_option("--p", compare_cfg.p, "RBO persistence parameter")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  compare->add_option("--variant", compare_cfg.variant, "RBO variant: ext or min")
      ->capture_default_str();
  compare->add_option("--denominator", compare_cfg.denominator,
                      "Agreement ratio denominator: relaxed or informed")
      ->capture_default_str();

  RegionsConfig regions_cfg;
  auto* regions = app.add_subcommand(
      "regions", "Region rollup of a map, or region-level performance breakdown");
  regions->add_option("--map", regions_cfg.map_path, "Dataset map json");
  regions->add_option("--registry", regions_cfg.registry_path, "Country registry jsonl");
  regions->add_option("--scores", regions_cfg.scores_path,
                      "Item scores jsonl ({item_id, score})");
  regions->add_option("--item-regions", regions_cfg.item_regions_path,
                      "Item regions jsonl ({item_id, regions})");
  regions->add_option("--mode", regions_cfg.mode,
                      "Multi-region items: each or dominant")
      ->capture_default_str();
  regions->add_option("--out", regions_cfg.out, "Output (- for stdout)")
      ->capture_default_str();

  RenderConfig render_cfg;
  auto* render = app.add_subcommand("render", "Render a choropleth or bar chart SVG");
  render->add_option("--map", render_cfg.map_path, "Dataset map json")->required();
  render->add_option("--geometry", render_cfg.geometry_path,
                     "GeoJSON FeatureCollection keyed by iso3");
  render->add_option("--profile", render_cfg.profile_path,
                     "Language profile json (bars)");
  render->add_option("--out", render_cfg.out, "SVG output (- for stdout)")->required();
  render->add_option("--scale", render_cfg.scale, "Choropleth color scale: log or linear")
      ->capture_default_str();
  render->add_flag("--bars", render_cfg.bars, "Render the speaker-comparison bar chart");
  render->add_option("--top-k", render_cfg.top_k, "Bar chart country count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", e.what()}}.dump() << '\n';
    err << app.help();
    return 1;
  }

  int code = 0;
  try {
    if (*ingest)
      code = run_ingest(ingest_cfg, out, err);
    else if (*resolve)
      code = run_resolve(resolve_cfg, out, err);
    else if (*report)
      code = run_report(report_cfg, out, err);
    else if (*factors)
      code = run_factors(factors_cfg, out, err);
    else if (*compare)
      code = run_compare(compare_cfg, out, err);
    else if (*regions)
      code = run_regions(regions_cfg, out, err);
    else if (*render)
      code = run_render(render_cfg, out, err);
    else {
      err << json{{"error", "no subcommand given"}}.dump() << '\n';
      code = 1;
    }
  } catch (const input_error& e) {
    err << json{{"error", e.what()}}.dump() << '\n';
    code = 1;
  } catch (const std::exception& e) {
    err << json{{"error", e.what()}, {"kind", "internal"}}.dump() << '\n';
    code = 2;
  }
  out.flush();
  err.flush();
  return code;
}

int run(const std::vector<std::string>& args) {
  return run(args, std::cout, std::cerr);
}

}  // namespace datamap::cli
