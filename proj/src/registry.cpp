#include "datamap/registry.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_set>

#include <json.hpp>

#include "datamap/text.hpp"

namespace datamap {

using nlohmann::json;

std::string_view region_name(Region region) {
  switch (region) {
    case Region::Africa: return "Africa";
    case Region::Americas: return "Americas";
    case Region::Asia: return "Asia";
    case Region::Europe: return "Europe";
    case Region::Oceania: return "Oceania";
  }
  return "Europe";
}

Region parse_region(std::string_view name) {
  if (name == "Africa") return Region::Africa;
  if (name == "Americas") return Region::Americas;
  if (name == "Asia") return Region::Asia;
  if (name == "Europe") return Region::Europe;
  if (name == "Oceania") return Region::Oceania;
  throw input_error("unknown region: " + std::string(name));
}

bool is_region_or_history(std::string_view name) {
  return name == kHistoryCategory || name == "Africa" || name == "Americas" ||
         name == "Asia" || name == "Europe" || name == "Oceania";
}

namespace {

bool is_iso3(std::string_view s) {
  if (s.size() != 3) return false;
  for (char c : s)
    if (c < 'A' || c > 'Z') return false;
  return true;
}

}  // namespace

CountryRegistry CountryRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open registry file: " + path.string());
  return from_stream(in);
}

CountryRegistry CountryRegistry::from_stream(std::istream& in) {
  CountryRegistry reg;
  std::unordered_set<std::string> qids, isos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw input_error("registry line " + std::to_string(line_no) + ": " + e.what());
    }
    auto fail = [&](const std::string& what) -> input_error {
      return input_error("registry line " + std::to_string(line_no) + ": " + what);
    };
    if (!rec.is_object()) throw fail("expected an object");
    CountryInfo info;
    if (!rec.contains("qid") || !rec["qid"].is_string() ||
        !is_qid(info.qid = rec["qid"].get<std::string>()))
      throw fail("bad qid");
    if (!rec.contains("iso3") || !rec["iso3"].is_string() ||
        !is_iso3(info.iso3 = rec["iso3"].get<std::string>()))
      throw fail("bad iso3");
    if (!rec.contains("region") || !rec["region"].is_string())
      throw fail("missing region");
    info.region = parse_region(rec["region"].get<std::string>());
    if (!rec.contains("centroid") || !rec["centroid"].is_array() ||
        rec["centroid"].size() != 2 || !rec["centroid"][0].is_number() ||
        !rec["centroid"][1].is_number())
      throw fail("bad centroid");
    info.lat = rec["centroid"][0].get<double>();
    info.lon = rec["centroid"][1].get<double>();
    if (info.lat < -90.0 || info.lat > 90.0 || info.lon < -180.0 || info.lon > 180.0)
      throw fail("centroid out of range");
    if (!qids.insert(info.qid).second) throw fail("duplicate qid " + info.qid);
    if (!isos.insert(info.iso3).second) throw fail("duplicate iso3 " + info.iso3);
    reg.entries_.push_back(std::move(info));
  }
  std::sort(reg.entries_.begin(), reg.entries_.end(),
            [](const CountryInfo& a, const CountryInfo& b) { return a.iso3 < b.iso3; });
  reg.by_qid_.resize(reg.entries_.size());
  for (std::size_t i = 0; i < reg.entries_.size(); ++i) reg.by_qid_[i] = i;
  std::sort(reg.by_qid_.begin(), reg.by_qid_.end(), [&](std::size_t a, std::size_t b) {
    return reg.entries_[a].qid < reg.entries_[b].qid;
  });
  return reg;
}

const CountryInfo* CountryRegistry::by_qid(std::string_view qid) const {
  auto it = std::lower_bound(by_qid_.begin(), by_qid_.end(), qid,
                             [&](std::size_t i, std::string_view q) {
                               return std::string_view(entries_[i].qid) < q;
                             });
  if (it == by_qid_.end() || entries_[*it].qid != qid) return nullptr;
  return &entries_[*it];
}

const CountryInfo* CountryRegistry::by_iso3(std::string_view iso3) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), iso3,
                             [](const CountryInfo& e, std::string_view code) {
                               return std::string_view(e.iso3) < code;
                             });
  if (it == entries_.end() || it->iso3 != iso3) return nullptr;
  return &*it;
}

std::vector<std::string> CountryRegistry::iso3_universe() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.iso3);
  return out;
}

}  // namespace datamap
