#include "datamap/text.hpp"

namespace datamap {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

namespace {

inline bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if (!is_continuation(c)) ++n;
  return n;
}

namespace {

bool is_prefixed_number(std::string_view s, char prefix) {
  if (s.size() < 2 || s[0] != prefix) return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

}  // namespace

bool is_qid(std::string_view s) { return is_prefixed_number(s, 'Q'); }
bool is_pid(std::string_view s) { return is_prefixed_number(s, 'P'); }

std::string utf8_substr(std::string_view s, std::size_t pos, std::size_t count) {
  std::size_t byte = 0, cp = 0;
  while (byte < s.size() && cp < pos) {
    ++byte;
    while (byte < s.size() && is_continuation(static_cast<unsigned char>(s[byte]))) ++byte;
    ++cp;
  }
  std::size_t begin = byte;
  std::size_t taken = 0;
  while (byte < s.size() && taken < count) {
    ++byte;
    while (byte < s.size() && is_continuation(static_cast<unsigned char>(s[byte]))) ++byte;
    ++taken;
  }
  return std::string(s.substr(begin, byte - begin));
}

}  // namespace datamap
