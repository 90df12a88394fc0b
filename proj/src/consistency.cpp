#include "datamap/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <unordered_set>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

namespace {

std::vector<std::string> dedupe_qids(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw input_error(where + ": qids must be an array");
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& v : arr) {
    if (!v.is_string()) throw input_error(where + ": qids must be strings");
    std::string qid = v.get<std::string>();
    if (seen.insert(qid).second) out.push_back(std::move(qid));
  }
  return out;
}

template <typename Fn>
void for_each_line_object(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw input_error(std::string(what) + " line " + std::to_string(line_no) +
                        ": " + e.what());
    }
    if (!rec.is_object())
      throw input_error(std::string(what) + " line " + std::to_string(line_no) +
                        ": expected an object");
    fn(rec, line_no);
  }
}

}  // namespace

RunOutput parse_run_jsonl(std::istream& in) {
  RunOutput run;
  for_each_line_object(in, "run file", [&](const json& rec, std::size_t line_no) {
    if (!rec.contains("unit_id") || !rec["unit_id"].is_string())
      throw input_error("run file line " + std::to_string(line_no) +
                        ": missing unit_id");
    std::string unit = rec["unit_id"].get<std::string>();
    if (!rec.contains("qids"))
      throw input_error("run file line " + std::to_string(line_no) +
                        ": missing qids");
    run[unit] = dedupe_qids(rec["qids"], "run file line " + std::to_string(line_no));
  });
  return run;
}

double agreement_ratio(std::size_t common, std::size_t relaxed_only,
                       std::size_t informed_total, AgreementDenominator denominator) {
  std::size_t denom = denominator == AgreementDenominator::RelaxedTotal
                          ? common + relaxed_only
                          : informed_total;
  if (denom == 0) return 0.0;
  return static_cast<double>(common) / static_cast<double>(denom);
}

Agreement agreement_at_k(const RunOutput& informed, const RunOutput& relaxed, int k,
                         AgreementDenominator denominator) {
  if (k < 1) throw input_error("agreement@k needs k >= 1");
  Agreement agg;
  std::set<std::string> units;
  for (const auto& [unit, qids] : informed) units.insert(unit);
  for (const auto& [unit, qids] : relaxed) units.insert(unit);
  agg.units = units.size();

  static const std::vector<std::string> kEmpty;
  for (const auto& unit : units) {
    auto a_it = informed.find(unit);
    auto b_it = relaxed.find(unit);
    if (a_it == informed.end() || b_it == relaxed.end()) ++agg.coverage_warnings;
    const auto& a = a_it == informed.end() ? kEmpty : a_it->second;
    const auto& b = b_it == relaxed.end() ? kEmpty : b_it->second;
    std::size_t ka = std::min<std::size_t>(a.size(), static_cast<std::size_t>(k));
    std::size_t kb = std::min<std::size_t>(b.size(), static_cast<std::size_t>(k));
    std::set<std::string> top_a(a.begin(), a.begin() + ka);
    std::size_t common = 0;
    for (std::size_t i = 0; i < kb; ++i)
      if (top_a.count(b[i])) ++common;
    agg.common += common;
    agg.relaxed_only += kb - common;
    agg.informed_total += ka;
  }
  agg.ratio = agreement_ratio(agg.common, agg.relaxed_only, agg.informed_total,
                              denominator);
  return agg;
}

double rbo(std::span<const std::string> a, std::span<const std::string> b, double p,
           int k, RboVariant variant) {
  if (!(p > 0.0 && p < 1.0)) throw input_error("rbo needs 0 < p < 1");
  if (k < 1) throw input_error("rbo needs depth k >= 1");
  auto check_dupes = [](std::span<const std::string> ranking, const char* name) {
    std::unordered_set<std::string_view> seen;
    for (const auto& item : ranking)
      if (!seen.insert(item).second)
        throw input_error(std::string("duplicate item in ranking ") + name + ": " +
                          item);
  };
  check_dupes(a, "a");
  check_dupes(b, "b");

  std::size_t la = std::min<std::size_t>(a.size(), static_cast<std::size_t>(k));
  std::size_t lb = std::min<std::size_t>(b.size(), static_cast<std::size_t>(k));
  std::size_t depth = std::max(la, lb);
  if (depth == 0) return 1.0;  // two empty rankings agree vacuously

  std::unordered_set<std::string_view> seen_a, seen_b;
  std::size_t common = 0;
  double weighted_sum = 0.0;
  double p_pow = 1.0;
  double a_d = 0.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    if (d <= la && d <= lb && a[d - 1] == b[d - 1]) {
      ++common;
    } else {
      if (d <= la) {
        if (seen_b.count(a[d - 1]))
          ++common;
        else
          seen_a.insert(a[d - 1]);
      }
      if (d <= lb) {
        if (seen_a.count(b[d - 1]))
          ++common;
        else
          seen_b.insert(b[d - 1]);
      }
    }
    p_pow *= p;
    a_d = static_cast<double>(common) / static_cast<double>(d);
    weighted_sum += p_pow * a_d;
  }
  double base = (1.0 - p) / p * weighted_sum;
  if (variant == RboVariant::Min) return base;
  return base + a_d * p_pow;
}

std::vector<std::string> country_ranking(const DatasetMap& map) {
  std::vector<std::pair<std::string, double>> entries;
  for (const auto& [iso3, w] : map.weights)
    if (w > 0.0) entries.emplace_back(iso3, w);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> ranking;
  ranking.reserve(entries.size());
  for (auto& [iso3, w] : entries) ranking.push_back(std::move(iso3));
  return ranking;
}

std::vector<PairSets> parse_pairs_jsonl(std::istream& in) {
  std::vector<PairSets> pairs;
  for_each_line_object(in, "pairs file", [&](const json& rec, std::size_t line_no) {
    PairSets pair;
    if (rec.contains("pair_id")) {
      if (rec["pair_id"].is_string())
        pair.pair_id = rec["pair_id"].get<std::string>();
      else
        pair.pair_id = rec["pair_id"].dump();
    } else {
      pair.pair_id = "pair" + std::to_string(line_no);
    }
    std::string where = "pairs file line " + std::to_string(line_no);
    if (!rec.contains("src_qids") || !rec.contains("tgt_qids"))
      throw input_error(where + ": needs src_qids and tgt_qids");
    pair.src = dedupe_qids(rec["src_qids"], where);
    pair.tgt = dedupe_qids(rec["tgt_qids"], where);
    pairs.push_back(std::move(pair));
  });
  return pairs;
}

ElConsistency el_consistency(std::span<const PairSets> pairs, int k) {
  if (k < 1) throw input_error("el consistency needs k >= 1");
  ElConsistency out;
  double total = 0.0;
  for (const PairSets& pair : pairs) {
    std::size_t ks = std::min<std::size_t>(pair.src.size(), static_cast<std::size_t>(k));
    if (ks == 0) {
      ++out.pairs_skipped;
      continue;
    }
    std::size_t kt = std::min<std::size_t>(pair.tgt.size(), static_cast<std::size_t>(k));
    std::unordered_set<std::string_view> tgt(pair.tgt.begin(), pair.tgt.begin() + kt);
    std::size_t common = 0;
    for (std::size_t i = 0; i < ks; ++i)
      if (tgt.count(pair.src[i])) ++common;
    total += static_cast<double>(common) / static_cast<double>(ks);
    ++out.pairs_scored;
  }
  if (out.pairs_scored > 0)
    out.percentage = 100.0 * total / static_cast<double>(out.pairs_scored);
  return out;
}

namespace {

struct Chunk {
  std::size_t begin;
  std::size_t end;  // half-open
  TokenLabel label;

  auto operator<=>(const Chunk&) const = default;
};

std::vector<Chunk> extract_chunks(std::span<const TokenLabel> labels,
                                  const std::set<TokenLabel>& types) {
  std::vector<Chunk> chunks;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] == TokenLabel::O) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    TokenLabel label = labels[i];
    while (i < labels.size() && labels[i] == label) ++i;
    if (types.count(label)) chunks.push_back(Chunk{begin, i, label});
  }
  return chunks;
}

}  // namespace

Prf projection_prf(std::span<const TokenLabel> gold,
                   std::span<const TokenLabel> predicted,
                   const std::set<TokenLabel>& types) {
  if (gold.size() != predicted.size())
    throw input_error("projection scoring needs token-aligned sequences (" +
                      std::to_string(gold.size()) + " vs " +
                      std::to_string(predicted.size()) + " tokens)");
  auto gold_chunks = extract_chunks(gold, types);
  auto pred_chunks = extract_chunks(predicted, types);
  std::set<Chunk> gold_set(gold_chunks.begin(), gold_chunks.end());
  Prf out;
  for (const Chunk& c : pred_chunks)
    if (gold_set.count(c))
      ++out.tp;
    else
      ++out.fp;
  out.fn = gold_chunks.size() - out.tp;
  out.precision = out.tp + out.fp > 0
                      ? static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp)
                      : 0.0;
  out.recall = out.tp + out.fn > 0
                   ? static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn)
                   : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace datamap
