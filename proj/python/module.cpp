#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "datamap/cli.hpp"
#include "datamap/consistency.hpp"
#include "datamap/factors.hpp"
#include "datamap/ingest.hpp"
#include "datamap/kb.hpp"
#include "datamap/regression.hpp"
#include "datamap/registry.hpp"
#include "datamap/render.hpp"
#include "datamap/report.hpp"
#include "datamap/resolver.hpp"
#include "datamap/stats.hpp"
#include "datamap/text.hpp"
#include "datamap/version.hpp"

namespace py = pybind11;
using namespace datamap;

namespace {

py::dict mention_to_dict(const LinkedMention& m) {
  py::dict d;
  d["unit_id"] = m.unit_id;
  d["surface"] = m.surface;
  d["span"] = py::make_tuple(m.begin, m.end);
  d["ner_label"] = std::string(ner_label_name(m.label));
  py::list candidates;
  for (const auto& c : m.candidates) {
    py::dict cd;
    cd["qid"] = c.qid;
    cd["score"] = c.score;
    cd["rank"] = c.rank;
    candidates.append(cd);
  }
  d["candidates"] = candidates;
  return d;
}

LinkedMention mention_from_dict(const py::dict& d) {
  LinkedMention m;
  m.unit_id = d.contains("unit_id") ? d["unit_id"].cast<std::string>() : "";
  if (d.contains("surface")) m.surface = d["surface"].cast<std::string>();
  if (d.contains("span")) {
    auto span = d["span"].cast<std::pair<std::size_t, std::size_t>>();
    m.begin = span.first;
    m.end = span.second;
  }
  if (d.contains("ner_label"))
    m.label = parse_ner_label(d["ner_label"].cast<std::string>());
  if (d.contains("candidates")) {
    int rank = 0;
    for (auto item : d["candidates"]) {
      Candidate c;
      if (py::isinstance<py::dict>(item)) {
        auto cd = item.cast<py::dict>();
        c.qid = cd["qid"].cast<std::string>();
        if (cd.contains("score")) c.score = cd["score"].cast<double>();
      } else {
        c.qid = item.cast<std::string>();
      }
      c.rank = ++rank;
      m.candidates.push_back(std::move(c));
    }
  }
  return m;
}

DatasetMap map_from_args(const std::map<std::string, double>& weights,
                         double historical, double unresolved, std::size_t mentions) {
  DatasetMap map;
  map.weights = weights;
  map.historical = historical;
  map.unresolved = unresolved;
  map.mentions = mentions;
  return map;
}

LanguageProfile profile_from_speakers(const std::map<std::string, std::int64_t>& speakers) {
  LanguageProfile profile;
  profile.speakers = speakers;
  return profile;
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix x(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != x.cols)
      throw input_error("design rows must all have the same length");
    for (std::size_t j = 0; j < x.cols; ++j) x.at(i, j) = rows[i][j];
  }
  return x;
}

TokenLabel token_label_from_string(const std::string& s) {
  if (s == "O") return TokenLabel::O;
  if (s == "PER") return TokenLabel::Per;
  if (s == "LOC") return TokenLabel::Loc;
  if (s == "ORG") return TokenLabel::Org;
  if (s == "OTHER") return TokenLabel::Other;
  throw input_error("unknown token label: " + s);
}

}  // namespace

PYBIND11_MODULE(_datamap, m) {
  m.doc() = "dataset geography toolkit: entity resolution to countries, "
            "representativeness measures, run comparison, rendering";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<input_error>(m, "InputError", PyExc_ValueError);

  // --- ingest ---------------------------------------------------------
  m.def(
      "parse_conll",
      [](const std::string& text, const std::string& language,
         const std::string& corpus_id) {
        std::istringstream in(text);
        ConllResult r = parse_conll(in, language, corpus_id);
        py::dict out;
        py::list units;
        for (const auto& u : r.units) {
          py::dict ud;
          ud["corpus_id"] = u.corpus_id;
          ud["unit_id"] = u.unit_id;
          ud["language"] = u.language;
          ud["text"] = u.text;
          units.append(ud);
        }
        py::list mentions;
        for (const auto& mm : r.mentions) mentions.append(mention_to_dict(mm));
        out["units"] = units;
        out["mentions"] = mentions;
        out["orphan_continuations"] = r.orphan_continuations;
        out["unknown_tags"] = r.unknown_tags;
        return out;
      },
      py::arg("text"), py::arg("language") = "und", py::arg("corpus_id") = "corpus");

  m.def(
      "parse_links_jsonl",
      [](const std::string& text) {
        std::istringstream in(text);
        LinksResult r = parse_links_jsonl(in);
        py::list mentions;
        for (const auto& mm : r.mentions) mentions.append(mention_to_dict(mm));
        py::dict out;
        out["mentions"] = mentions;
        out["rejected"] = r.rejected;
        return out;
      },
      py::arg("text"));

  // --- knowledge base and resolution -----------------------------------
  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def(py::init<>())
      .def("load_snapshot",
           [](KnowledgeBase& kb, const std::filesystem::path& path) {
             kb.load_snapshot(path);
           })
      .def("attach_cache", &KnowledgeBase::attach_cache)
      .def("insert",
           [](KnowledgeBase& kb, const std::string& record) {
             kb.insert(parse_snapshot_record(record));
           },
           "Insert one snapshot-format JSON record")
      .def("__len__", &KnowledgeBase::size);

  py::class_<CountryRegistry>(m, "CountryRegistry")
      .def(py::init([](const std::filesystem::path& path) {
             return CountryRegistry::load(path);
           }),
           py::arg("path"))
      .def("iso3_universe", &CountryRegistry::iso3_universe)
      .def("__len__", &CountryRegistry::size);

  m.def(
      "resolve_entity",
      [](const std::string& qid, const std::optional<std::string>& type,
         const KnowledgeBase& kb, const CountryRegistry& registry) {
        std::optional<EntityType> hint;
        if (type) {
          hint = parse_entity_type(*type);
          if (!hint) throw input_error("unknown entity type: " + *type);
        }
        Resolution r = resolve_entity(qid, hint, kb, registry);
        py::dict out;
        out["outcome"] = r.outcome == Outcome::Countries   ? "countries"
                         : r.outcome == Outcome::Historical ? "historical"
                                                            : "unresolved";
        out["countries"] = std::vector<std::string>(r.countries.begin(),
                                                    r.countries.end());
        return out;
      },
      py::arg("qid"), py::arg("type"), py::arg("kb"), py::arg("registry"));

  m.def(
      "build_dataset_map",
      [](const py::list& mentions, const KnowledgeBase& kb,
         const CountryRegistry& registry, const std::string& corpus_id,
         const std::string& language, int top_k) {
        std::vector<LinkedMention> parsed;
        for (auto item : mentions) parsed.push_back(mention_from_dict(item.cast<py::dict>()));
        MapOptions options;
        options.top_k = top_k;
        DatasetMap map =
            build_dataset_map(parsed, kb, registry, corpus_id, language, options);
        py::dict out;
        out["corpus_id"] = map.corpus_id;
        out["language"] = map.language;
        out["weights"] = map.weights;
        out["historical"] = map.historical;
        out["unresolved"] = map.unresolved;
        out["mentions"] = map.mentions;
        return out;
      },
      py::arg("mentions"), py::arg("kb"), py::arg("registry"),
      py::arg("corpus_id") = "corpus", py::arg("language") = "und",
      py::arg("top_k") = 1);

  // --- representativeness statistics -----------------------------------
  m.def(
      "in_country_share",
      [](const std::map<std::string, double>& weights,
         const std::map<std::string, std::int64_t>& speakers) {
        return in_country_share(map_from_args(weights, 0, 0, 0),
                                profile_from_speakers(speakers));
      },
      py::arg("weights"), py::arg("speakers"));

  m.def(
      "unrepresented",
      [](const std::map<std::string, double>& weights,
         const std::vector<std::string>& universe, double threshold) {
        Unrepresented u =
            unrepresented(map_from_args(weights, 0, 0, 0), universe, threshold);
        return py::make_tuple(u.count, u.countries);
      },
      py::arg("weights"), py::arg("universe"), py::arg("threshold") = 0.0);

  m.def("gini", [](const std::vector<double>& weights) { return gini(weights); },
        py::arg("weights"));

  m.def(
      "gini_universe",
      [](const std::map<std::string, double>& weights,
         const std::vector<std::string>& universe) {
        return gini_over_universe(map_from_args(weights, 0, 0, 0), universe);
      },
      py::arg("weights"), py::arg("universe"));

  m.def("bhattacharyya", &bhattacharyya, py::arg("p"), py::arg("q"));

  m.def(
      "speaker_comparison",
      [](const std::map<std::string, double>& weights,
         const std::map<std::string, std::int64_t>& speakers) {
        SpeakerComparison cmp = speaker_comparison(map_from_args(weights, 0, 0, 0),
                                                   profile_from_speakers(speakers));
        py::dict out;
        out["entity_share"] = cmp.entity_share;
        out["speaker_share"] = cmp.speaker_share;
        out["entity_all_zero"] = cmp.entity_all_zero;
        return out;
      },
      py::arg("weights"), py::arg("speakers"));

  m.def(
      "region_rollup",
      [](const std::map<std::string, double>& weights, double historical,
         const CountryRegistry& registry) {
        return region_rollup(map_from_args(weights, historical, 0, 0), registry);
      },
      py::arg("weights"), py::arg("historical"), py::arg("registry"));

  m.def(
      "region_performance",
      [](const std::map<std::string, double>& scores,
         const std::map<std::string, std::vector<std::string>>& item_regions,
         const std::string& mode) {
        MultiRegionMode m_mode = mode == "dominant" ? MultiRegionMode::Dominant
                                                    : MultiRegionMode::Each;
        if (mode != "each" && mode != "dominant")
          throw input_error("mode must be each or dominant");
        RegionBreakdown b = region_performance(scores, item_regions, m_mode);
        py::dict out;
        out["means"] = b.means;
        out["counts"] = b.counts;
        out["macro_stdev"] = b.macro_stdev;
        out["skipped_items"] = b.skipped_items;
        return out;
      },
      py::arg("scores"), py::arg("item_regions"), py::arg("mode") = "each");

  // --- factor model ----------------------------------------------------
  m.def("haversine_km", &haversine_km, py::arg("lat1"), py::arg("lon1"),
        py::arg("lat2"), py::arg("lon2"));

  m.def(
      "fit_ols",
      [](const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
        OlsFit fit = fit_ols(matrix_from_rows(x), y);
        return py::make_tuple(fit.coefficients, fit.intercept);
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "cross_validate",
      [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
         int folds, std::uint64_t seed) {
        CvOptions options;
        options.folds = folds;
        options.seed = seed;
        RegressionResult r = cross_validate(matrix_from_rows(x), y, options);
        py::dict out;
        out["coefficients"] = r.coefficients;
        out["intercept"] = r.intercept;
        py::list per_fold;
        for (const auto& f : r.per_fold) {
          py::dict fd;
          fd["explained_variance"] = f.explained_variance;
          fd["mae"] = f.mae;
          per_fold.append(fd);
        }
        out["per_fold"] = per_fold;
        out["mean_explained_variance"] = r.mean_explained_variance;
        out["mean_mae"] = r.mean_mae;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("folds") = 5, py::arg("seed") = 0);

  // --- run comparison ---------------------------------------------------
  m.def(
      "agreement_at_k",
      [](const RunOutput& informed, const RunOutput& relaxed, int k,
         const std::string& denominator) {
        AgreementDenominator denom;
        if (denominator == "relaxed")
          denom = AgreementDenominator::RelaxedTotal;
        else if (denominator == "informed")
          denom = AgreementDenominator::InformedTotal;
        else
          throw input_error("denominator must be relaxed or informed");
        Agreement a = agreement_at_k(informed, relaxed, k, denom);
        py::dict out;
        out["common"] = a.common;
        out["relaxed_only"] = a.relaxed_only;
        out["informed_total"] = a.informed_total;
        out["ratio"] = a.ratio;
        out["units"] = a.units;
        out["coverage_warnings"] = a.coverage_warnings;
        return out;
      },
      py::arg("informed"), py::arg("relaxed"), py::arg("k") = 1,
      py::arg("denominator") = "relaxed");

  m.def(
      "rbo",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b,
         double p, int k, const std::string& variant) {
        if (variant != "ext" && variant != "min")
          throw input_error("variant must be ext or min");
        return rbo(a, b, p, k,
                   variant == "min" ? RboVariant::Min : RboVariant::Extrapolated);
      },
      py::arg("a"), py::arg("b"), py::arg("p") = 0.9, py::arg("k") = 10,
      py::arg("variant") = "ext");

  m.def(
      "country_ranking",
      [](const std::map<std::string, double>& weights) {
        return country_ranking(map_from_args(weights, 0, 0, 0));
      },
      py::arg("weights"));

  m.def(
      "el_consistency",
      [](const std::vector<std::pair<std::vector<std::string>,
                                     std::vector<std::string>>>& pairs,
         int k) {
        std::vector<PairSets> parsed;
        std::size_t n = 0;
        for (const auto& [src, tgt] : pairs)
          parsed.push_back(PairSets{"pair" + std::to_string(++n), src, tgt});
        ElConsistency r = el_consistency(parsed, k);
        py::dict out;
        out["percentage"] = r.percentage;
        out["pairs_scored"] = r.pairs_scored;
        out["pairs_skipped"] = r.pairs_skipped;
        return out;
      },
      py::arg("pairs"), py::arg("k") = 1);

  m.def(
      "projection_prf",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& predicted) {
        std::vector<TokenLabel> g, p;
        for (const auto& s : gold) g.push_back(token_label_from_string(s));
        for (const auto& s : predicted) p.push_back(token_label_from_string(s));
        Prf r = projection_prf(g, p);
        py::dict out;
        out["precision"] = r.precision;
        out["recall"] = r.recall;
        out["f1"] = r.f1;
        out["tp"] = r.tp;
        out["fp"] = r.fp;
        out["fn"] = r.fn;
        return out;
      },
      py::arg("gold"), py::arg("predicted"));

  // --- reporting / rendering --------------------------------------------
  m.def(
      "emit_report",
      [](const std::string& map_json, const std::optional<std::string>& profile_json,
         const CountryRegistry& registry, double threshold, bool reproducible) {
        DatasetMap map = parse_dataset_map(map_json);
        std::optional<LanguageProfile> profile;
        if (profile_json) profile = LanguageProfile::parse(*profile_json);
        ReportOptions options;
        options.threshold = threshold;
        options.reproducible = reproducible;
        return emit_report(map, profile ? &*profile : nullptr, registry, options);
      },
      py::arg("map_json"), py::arg("profile_json"), py::arg("registry"),
      py::arg("threshold") = 0.0, py::arg("reproducible") = true);

  m.def(
      "render_choropleth",
      [](const std::string& map_json, const std::string& geometry_json,
         const std::string& scale) {
        if (scale != "log" && scale != "linear")
          throw input_error("scale must be log or linear");
        DatasetMap map = parse_dataset_map(map_json);
        WorldGeometry geometry = WorldGeometry::parse(geometry_json);
        ChoroplethOptions options;
        options.scale = scale == "linear" ? ColorScale::Linear : ColorScale::Log;
        return emit_choropleth(map, geometry, options);
      },
      py::arg("map_json"), py::arg("geometry_json"), py::arg("scale") = "log");

  m.def(
      "render_bars",
      [](const std::string& map_json, const std::string& profile_json,
         std::size_t top_k) {
        DatasetMap map = parse_dataset_map(map_json);
        LanguageProfile profile = LanguageProfile::parse(profile_json);
        BarsOptions options;
        options.top_k = top_k;
        return emit_bars(speaker_comparison(map, profile), options);
      },
      py::arg("map_json"), py::arg("profile_json"), py::arg("top_k") = 10);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) { return datamap::cli::run(args); },
      py::arg("args"), "Run a CLI subcommand in-process; returns the exit code");
}
