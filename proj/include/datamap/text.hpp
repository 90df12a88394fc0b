#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace datamap {

/// Raised for malformed user input (files, flags, records). The CLI maps it
/// to exit code 1; anything else escaping to main is an internal error (2).
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view trim(std::string_view s);

// Spans and surface offsets are Unicode code points, not bytes. All input
// files are UTF-8.
std::size_t utf8_length(std::string_view s);
std::string utf8_substr(std::string_view s, std::size_t pos, std::size_t count);

// Wikidata identifier shapes: ^Q[0-9]+$ and ^P[0-9]+$.
bool is_qid(std::string_view s);
bool is_pid(std::string_view s);

}  // namespace datamap
