#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace datamap {

enum class NerLabel { Per, Loc, Org, Other, Unknown };

std::string_view ner_label_name(NerLabel label);
NerLabel parse_ner_label(std::string_view name);

/// One sentence / question / text record of a corpus.
struct TextUnit {
  std::string corpus_id;
  std::string unit_id;  // unique within the corpus
  std::string language;
  std::string text;

  bool operator==(const TextUnit&) const = default;
};

struct Candidate {
  std::string qid;  // ^Q[0-9]+$
  double score = 0.0;
  int rank = 0;  // 1-based, strictly increasing

  bool operator==(const Candidate&) const = default;
};

/// An entity mention with ranked knowledge-base candidates. Span offsets are
/// half-open Unicode code point positions into the owning unit's text.
/// Mentions coming out of the CoNLL parser carry no candidates yet; the
/// candidate list is filled from external linker output (links-jsonl).
struct LinkedMention {
  std::string unit_id;
  std::string surface;
  std::size_t begin = 0;
  std::size_t end = 0;
  NerLabel label = NerLabel::Unknown;
  std::vector<Candidate> candidates;

  bool operator==(const LinkedMention&) const = default;
};

struct ConllResult {
  std::vector<TextUnit> units;
  std::vector<LinkedMention> mentions;
  std::size_t orphan_continuations = 0;  // I-X without an open B-X run
  std::size_t unknown_tags = 0;          // tags outside the O/B-/I- scheme

  std::size_t warnings() const { return orphan_continuations + unknown_tags; }
};

/// Parses `token<TAB>tag` lines, blank line = sentence boundary. Sentence
/// text is the tokens joined by single spaces; one mention per maximal
/// B-/I- run. Tag schemes outside PER/LOC/ORG map to Other. Malformed lines
/// are fatal with the line number; orphan continuations are repaired and
/// tallied.
ConllResult parse_conll(std::istream& in, std::string_view language,
                        std::string_view corpus_id);

/// Per-token label after collapsing the B-/I- scheme; O marks tokens outside
/// any entity. Used for projection-consistency scoring.
enum class TokenLabel { O, Per, Loc, Org, Other };

std::string_view token_label_name(TokenLabel label);

/// Flat per-token labels (B-/I- collapsed, sentences concatenated) for
/// projection scoring.
std::vector<TokenLabel> parse_conll_label_sequence(std::istream& in);

struct QaOptions {
  std::string text_field = "question";
  bool dedupe = false;  // drop units repeating an earlier unit's text
};

struct QaResult {
  std::vector<TextUnit> units;
  std::size_t skipped = 0;     // records without usable id/text
  std::size_t duplicates = 0;  // dropped by dedupe
};

/// Accepts a JSON array of records or JSON-lines. Invalid JSON is fatal with
/// a byte offset; records missing the text field (or an id) are skipped and
/// counted.
QaResult parse_qa_json(std::istream& in, std::string_view language,
                       std::string_view corpus_id, const QaOptions& options = {});

struct LinksResult {
  std::vector<LinkedMention> mentions;
  std::size_t rejected = 0;  // records failing schema checks
};

struct LinksOptions {
  /// Accept mentions with no candidates (span-only streams headed for a
  /// --links join). Linker output proper must carry candidates.
  bool allow_missing_candidates = false;
};

/// Linker-output interchange: one JSON object per line
///   {"unit_id":..., "surface":..., "span":[s,e], "ner_label":?, "candidates":[{"qid","score"},...]}
/// Candidates keep file order; ranks are assigned 1..n. A top-level JSON
/// array is also accepted for small files.
LinksResult parse_links_jsonl(std::istream& in, const LinksOptions& options = {});

void write_links_jsonl(std::span<const LinkedMention> mentions, std::ostream& out);
void write_units_jsonl(std::span<const TextUnit> units, std::ostream& out);

}  // namespace datamap
