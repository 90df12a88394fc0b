#include "datamap/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <iterator>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

std::string_view ner_label_name(NerLabel label) {
  switch (label) {
    case NerLabel::Per: return "PER";
    case NerLabel::Loc: return "LOC";
    case NerLabel::Org: return "ORG";
    case NerLabel::Other: return "OTHER";
    case NerLabel::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string_view token_label_name(TokenLabel label) {
  switch (label) {
    case TokenLabel::O: return "O";
    case TokenLabel::Per: return "PER";
    case TokenLabel::Loc: return "LOC";
    case TokenLabel::Org: return "ORG";
    case TokenLabel::Other: return "OTHER";
  }
  return "O";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::toupper(static_cast<unsigned char>(a[i])) !=
        std::toupper(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace

NerLabel parse_ner_label(std::string_view name) {
  if (iequals(name, "PER")) return NerLabel::Per;
  if (iequals(name, "LOC")) return NerLabel::Loc;
  if (iequals(name, "ORG")) return NerLabel::Org;
  if (iequals(name, "OTHER")) return NerLabel::Other;
  return NerLabel::Unknown;
}

namespace {

enum class TagKind { Outside, Begin, Inside, Unknown };

struct ParsedTag {
  TagKind kind = TagKind::Outside;
  std::string scheme;  // raw X of B-X / I-X
};

ParsedTag parse_tag(std::string_view tag) {
  if (tag == "O") return {TagKind::Outside, {}};
  if (tag.size() > 2 && tag[1] == '-') {
    if (tag[0] == 'B') return {TagKind::Begin, std::string(tag.substr(2))};
    if (tag[0] == 'I') return {TagKind::Inside, std::string(tag.substr(2))};
  }
  return {TagKind::Unknown, {}};
}

// PER/LOC/ORG keep their identity; every other scheme (MISC, DATE, ...)
// loads as Other so WikiANN/MasakhaNER variants both parse.
NerLabel scheme_to_label(std::string_view scheme) {
  NerLabel label = parse_ner_label(scheme);
  return label == NerLabel::Unknown ? NerLabel::Other : label;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

struct ConllLine {
  bool blank = false;
  std::string token;
  ParsedTag tag;
};

ConllLine parse_conll_line(const std::string& line, std::size_t line_no) {
  ConllLine out;
  if (trim(line).empty()) {
    out.blank = true;
    return out;
  }
  auto tab = line.find('\t');
  if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
    throw input_error("conll parse error at line " + std::to_string(line_no) +
                      ": expected exactly `token<TAB>tag`");
  out.token = line.substr(0, tab);
  std::string tag = line.substr(tab + 1);
  if (out.token.empty() || tag.empty())
    throw input_error("conll parse error at line " + std::to_string(line_no) +
                      ": empty token or tag");
  out.tag = parse_tag(tag);
  return out;
}

}  // namespace

ConllResult parse_conll(std::istream& in, std::string_view language,
                        std::string_view corpus_id) {
  ConllResult result;

  std::string text;            // reconstructed sentence, tokens joined by " "
  std::size_t text_cp = 0;     // code point length of `text`
  std::size_t sentence_no = 0;
  std::string unit_id;

  struct OpenMention {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string surface;
    std::string scheme;
  };
  std::optional<OpenMention> open;
  std::vector<LinkedMention> sentence_mentions;

  auto close_mention = [&] {
    if (!open) return;
    sentence_mentions.push_back(LinkedMention{
        unit_id, open->surface, open->begin, open->end,
        scheme_to_label(open->scheme), {}});
    open.reset();
  };

  auto flush_sentence = [&] {
    close_mention();
    if (!text.empty()) {
      result.units.push_back(TextUnit{std::string(corpus_id), unit_id,
                                      std::string(language), text});
      for (auto& m : sentence_mentions) result.mentions.push_back(std::move(m));
    }
    sentence_mentions.clear();
    text.clear();
    text_cp = 0;
  };

  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    ConllLine parsed = parse_conll_line(line, line_no);
    if (parsed.blank) {
      flush_sentence();
      continue;
    }
    if (text.empty()) unit_id = "s" + std::to_string(++sentence_no);

    std::size_t token_begin = text_cp;
    if (!text.empty()) {
      text += ' ';
      ++token_begin;
    }
    text += parsed.token;
    std::size_t token_cp = utf8_length(parsed.token);
    text_cp = token_begin + token_cp;

    switch (parsed.tag.kind) {
      case TagKind::Begin:
        close_mention();
        open = OpenMention{token_begin, text_cp, parsed.token, parsed.tag.scheme};
        break;
      case TagKind::Inside:
        if (open && open->scheme == parsed.tag.scheme) {
          open->surface += ' ';
          open->surface += parsed.token;
          open->end = text_cp;
        } else {
          // I-X with no matching open run: repaired to B-X, tallied.
          ++result.orphan_continuations;
          close_mention();
          open = OpenMention{token_begin, text_cp, parsed.token, parsed.tag.scheme};
        }
        break;
      case TagKind::Outside:
        close_mention();
        break;
      case TagKind::Unknown:
        ++result.unknown_tags;
        close_mention();
        break;
    }
  }
  flush_sentence();
  return result;
}

std::vector<TokenLabel> parse_conll_label_sequence(std::istream& in) {
  std::vector<TokenLabel> labels;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    ConllLine parsed = parse_conll_line(line, line_no);
    if (parsed.blank) continue;
    switch (parsed.tag.kind) {
      case TagKind::Begin:
      case TagKind::Inside:
        switch (scheme_to_label(parsed.tag.scheme)) {
          case NerLabel::Per: labels.push_back(TokenLabel::Per); break;
          case NerLabel::Loc: labels.push_back(TokenLabel::Loc); break;
          case NerLabel::Org: labels.push_back(TokenLabel::Org); break;
          default: labels.push_back(TokenLabel::Other); break;
        }
        break;
      case TagKind::Outside:
      case TagKind::Unknown:
        labels.push_back(TokenLabel::O);
        break;
    }
  }
  return labels;
}

namespace {

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::size_t first_content_byte(std::string_view buf) {
  auto pos = buf.find_first_not_of(" \t\r\n");
  return pos == std::string_view::npos ? buf.size() : pos;
}

json parse_json_at(const std::string& chunk, std::size_t chunk_offset) {
  try {
    return json::parse(chunk);
  } catch (const json::parse_error& e) {
    throw input_error("invalid JSON at byte " +
                      std::to_string(chunk_offset + e.byte) + ": " + e.what());
  }
}

// Iterates records from either a top-level JSON array or JSON-lines,
// invoking fn(record). Invalid JSON is fatal; per-record problems are the
// callback's business.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string buf = read_all(in);
  std::size_t start = first_content_byte(buf);
  if (start < buf.size() && buf[start] == '[') {
    json doc = parse_json_at(buf, 0);
    for (auto& rec : doc) fn(rec);
    return;
  }
  std::size_t offset = 0;
  while (offset < buf.size()) {
    std::size_t eol = buf.find('\n', offset);
    std::size_t len = (eol == std::string::npos ? buf.size() : eol) - offset;
    std::string line = buf.substr(offset, len);
    if (!trim(line).empty()) fn(parse_json_at(line, offset));
    offset += len + 1;
  }
}

}  // namespace

QaResult parse_qa_json(std::istream& in, std::string_view language,
                       std::string_view corpus_id, const QaOptions& options) {
  QaResult result;
  std::unordered_set<std::string> seen;
  for_each_record(in, [&](const json& rec) {
    if (!rec.is_object()) {
      ++result.skipped;
      return;
    }
    auto id_it = rec.find("id");
    std::string id;
    if (id_it == rec.end()) {
      ++result.skipped;
      return;
    }
    if (id_it->is_string())
      id = id_it->get<std::string>();
    else if (id_it->is_number())
      id = id_it->dump();
    else {
      ++result.skipped;
      return;
    }
    auto text_it = rec.find(options.text_field);
    if (text_it == rec.end() || !text_it->is_string()) {
      ++result.skipped;
      return;
    }
    std::string text(trim(text_it->get<std::string>()));
    if (text.empty()) {
      ++result.skipped;
      return;
    }
    if (options.dedupe && !seen.insert(text).second) {
      ++result.duplicates;
      return;
    }
    result.units.push_back(
        TextUnit{std::string(corpus_id), id, std::string(language), text});
  });
  return result;
}

LinksResult parse_links_jsonl(std::istream& in, const LinksOptions& options) {
  LinksResult result;
  for_each_record(in, [&](const json& rec) {
    if (!rec.is_object()) {
      ++result.rejected;
      return;
    }
    LinkedMention m;
    auto get_string = [&](const char* key, std::string& out) {
      auto it = rec.find(key);
      if (it == rec.end() || !it->is_string()) return false;
      out = it->get<std::string>();
      return !out.empty();
    };
    if (!get_string("unit_id", m.unit_id) || !get_string("surface", m.surface)) {
      ++result.rejected;
      return;
    }
    auto span_it = rec.find("span");
    if (span_it == rec.end() || !span_it->is_array() || span_it->size() != 2 ||
        !(*span_it)[0].is_number_unsigned() || !(*span_it)[1].is_number_unsigned()) {
      ++result.rejected;
      return;
    }
    m.begin = (*span_it)[0].get<std::size_t>();
    m.end = (*span_it)[1].get<std::size_t>();
    if (m.begin >= m.end) {
      ++result.rejected;
      return;
    }
    m.label = NerLabel::Unknown;
    if (auto it = rec.find("ner_label"); it != rec.end()) {
      if (!it->is_string()) {
        ++result.rejected;
        return;
      }
      m.label = parse_ner_label(it->get<std::string>());
    }
    auto cand_it = rec.find("candidates");
    bool has_candidates =
        cand_it != rec.end() && cand_it->is_array() && !cand_it->empty();
    if (!has_candidates) {
      if (cand_it != rec.end() && !cand_it->is_array()) {
        ++result.rejected;
        return;
      }
      if (!options.allow_missing_candidates) {
        ++result.rejected;
        return;
      }
      result.mentions.push_back(std::move(m));
      return;
    }
    int rank = 0;
    for (const auto& c : *cand_it) {
      if (!c.is_object() || !c.contains("qid") || !c["qid"].is_string() ||
          !c.contains("score") || !c["score"].is_number()) {
        ++result.rejected;
        return;
      }
      std::string qid = c["qid"].get<std::string>();
      if (!is_qid(qid)) {
        ++result.rejected;
        return;
      }
      m.candidates.push_back(Candidate{std::move(qid), c["score"].get<double>(), ++rank});
    }
    result.mentions.push_back(std::move(m));
  });
  return result;
}

void write_links_jsonl(std::span<const LinkedMention> mentions, std::ostream& out) {
  for (const auto& m : mentions) {
    json rec;
    rec["unit_id"] = m.unit_id;
    rec["surface"] = m.surface;
    rec["span"] = json::array({m.begin, m.end});
    rec["ner_label"] = ner_label_name(m.label);
    json cands = json::array();
    for (const auto& c : m.candidates) cands.push_back({{"qid", c.qid}, {"score", c.score}});
    rec["candidates"] = std::move(cands);
    out << rec.dump() << '\n';
  }
}

void write_units_jsonl(std::span<const TextUnit> units, std::ostream& out) {
  for (const auto& u : units) {
    json rec{{"corpus_id", u.corpus_id},
             {"unit_id", u.unit_id},
             {"language", u.language},
             {"text", u.text}};
    out << rec.dump() << '\n';
  }
}

}  // namespace datamap
