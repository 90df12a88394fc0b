#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "datamap/ingest.hpp"
#include "datamap/resolver.hpp"

namespace datamap {

/// One entity-linking run: ranked, duplicate-free QIDs per unit.
using RunOutput = std::map<std::string, std::vector<std::string>>;

/// JSON-lines `{"unit_id":..., "qids":[...]}`. Repeats within a unit are
/// dropped, first occurrence wins.
RunOutput parse_run_jsonl(std::istream& in);

enum class AgreementDenominator {
  RelaxedTotal,   // common / (common + relaxed_only) -- reproduces the
                  // published per-language triplets
  InformedTotal,  // common / informed top-k count
};

struct Agreement {
  std::size_t common = 0;        // |A_k intersect B_k| summed over units
  std::size_t relaxed_only = 0;  // |B_k minus A_k| summed
  std::size_t informed_total = 0;
  std::size_t units = 0;
  std::size_t coverage_warnings = 0;  // units present in only one run
  double ratio = 0.0;
};

Agreement agreement_at_k(const RunOutput& informed, const RunOutput& relaxed, int k,
                         AgreementDenominator denominator =
                             AgreementDenominator::RelaxedTotal);

double agreement_ratio(std::size_t common, std::size_t relaxed_only,
                       std::size_t informed_total, AgreementDenominator denominator);

enum class RboVariant { Extrapolated, Min };

/// Rank-biased overlap between duplicate-free rankings, both truncated to
/// depth k. Extrapolated variant: (1-p)/p * sum_d p^d A_d + A_D p^D with
/// A_d the prefix agreement; identical truncated rankings give exactly 1.
double rbo(std::span<const std::string> a, std::span<const std::string> b,
           double p = 0.9, int k = 10, RboVariant variant = RboVariant::Extrapolated);

/// Countries of a map ordered by descending weight, ties by ascending iso3.
/// Zero-weight countries are not ranked.
std::vector<std::string> country_ranking(const DatasetMap& map);

struct PairSets {
  std::string pair_id;
  std::vector<std::string> src;  // ranked source-sentence QIDs
  std::vector<std::string> tgt;
};

/// JSON-lines `{"pair_id":..., "src_qids":[...], "tgt_qids":[...]}`.
std::vector<PairSets> parse_pairs_jsonl(std::istream& in);

struct ElConsistency {
  double percentage = 0.0;  // mean of per-pair |S_k ^ T_k| / |S_k|, times 100
  std::size_t pairs_scored = 0;
  std::size_t pairs_skipped = 0;  // empty source set
};

ElConsistency el_consistency(std::span<const PairSets> pairs, int k);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

/// Entity-level exact span-and-type match between two token-aligned label
/// sequences. Entities are maximal runs of one non-O label; evaluation is
/// restricted to the given label types. Zero denominators score 0.
Prf projection_prf(std::span<const TokenLabel> gold, std::span<const TokenLabel> predicted,
                   const std::set<TokenLabel>& types = {TokenLabel::Per, TokenLabel::Loc,
                                                        TokenLabel::Org});

}  // namespace datamap
