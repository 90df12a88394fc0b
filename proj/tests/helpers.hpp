#pragma once

#include <unistd.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    static std::atomic<unsigned> counter{0};
    path_ = base / ("datamap_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal XML well-formedness check, independent of any SVG code: balanced
// tags, quoted attributes, legal bare text, a single root element.
inline bool xml_well_formed(const std::string& doc, std::string* why = nullptr) {
  auto fail = [&](const std::string& message) {
    if (why) *why = message;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  std::size_t n = doc.size();
  bool seen_root = false;
  bool after_root = false;

  auto skip_until = [&](const std::string& end) {
    auto pos = doc.find(end, i);
    if (pos == std::string::npos) return false;
    i = pos + end.size();
    return true;
  };

  while (i < n) {
    char c = doc[i];
    if (c == '<') {
      if (i + 1 >= n) return fail("dangling <");
      if (doc.compare(i, 5, "<?xml") == 0) {
        if (!skip_until("?>")) return fail("unterminated xml declaration");
        continue;
      }
      if (doc.compare(i, 4, "<!--") == 0) {
        if (!skip_until("-->")) return fail("unterminated comment");
        continue;
      }
      if (doc.compare(i, 2, "</") == 0) {
        auto close = doc.find('>', i);
        if (close == std::string::npos) return fail("unterminated end tag");
        std::string name = doc.substr(i + 2, close - i - 2);
        while (!name.empty() && (name.back() == ' ' || name.back() == '\n'))
          name.pop_back();
        if (stack.empty()) return fail("end tag with empty stack: " + name);
        if (stack.back() != name)
          return fail("mismatched end tag: expected " + stack.back() + " got " + name);
        stack.pop_back();
        if (stack.empty()) after_root = true;
        i = close + 1;
        continue;
      }
      // Start tag: parse the name, then attributes with quoted values.
      std::size_t j = i + 1;
      std::string name;
      while (j < n && (std::isalnum(static_cast<unsigned char>(doc[j])) ||
                       doc[j] == ':' || doc[j] == '-' || doc[j] == '_'))
        name += doc[j++];
      if (name.empty()) return fail("empty tag name");
      bool self_closing = false;
      while (j < n) {
        if (doc[j] == '>') break;
        if (doc[j] == '/' && j + 1 < n && doc[j + 1] == '>') {
          self_closing = true;
          ++j;
          break;
        }
        if (doc[j] == '"') {
          auto close_quote = doc.find('"', j + 1);
          if (close_quote == std::string::npos) return fail("unterminated attribute");
          for (std::size_t q = j + 1; q < close_quote; ++q)
            if (doc[q] == '<') return fail("raw < in attribute value");
          j = close_quote + 1;
          continue;
        }
        if (doc[j] == '<') return fail("raw < inside tag");
        ++j;
      }
      if (j >= n) return fail("unterminated start tag " + name);
      if (after_root) return fail("content after root element");
      if (!self_closing) {
        stack.push_back(name);
      } else if (stack.empty()) {
        if (seen_root) return fail("multiple roots");
        after_root = true;
      }
      seen_root = true;
      i = j + 1;
      continue;
    }
    if (c == '&') {
      static const char* entities[] = {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"};
      bool ok = false;
      for (const char* e : entities)
        if (doc.compare(i, std::strlen(e), e) == 0) {
          i += std::strlen(e);
          ok = true;
          break;
        }
      if (!ok) return fail("bare & at offset " + std::to_string(i));
      continue;
    }
    if (c == '>') return fail("bare > outside tag");
    ++i;
  }
  if (!stack.empty()) return fail("unclosed element " + stack.back());
  if (!seen_root) return fail("no root element");
  return true;
}

// Brute-force normal-equations OLS (with intercept), the independent oracle
// for the QR path. Gaussian elimination with partial pivoting.
inline std::vector<double> normal_equations_ols(const std::vector<std::vector<double>>& x,
                                                const std::vector<double>& y) {
  std::size_t n = x.size();
  std::size_t p = x.empty() ? 0 : x.front().size();
  std::size_t dim = p + 1;  // [intercept, coefficients...]
  std::vector<std::vector<double>> a(dim, std::vector<double>(dim + 1, 0.0));
  auto cell = [&](std::size_t row, std::size_t j) {
    return j == 0 ? 1.0 : x[row][j - 1];
  };
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cell(i, r) * cell(i, c);
      a[r][c] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cell(i, r) * y[i];
    a[r][dim] = s;
  }
  for (std::size_t k = 0; k < dim; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < dim; ++r)
      if (std::abs(a[r][k]) > std::abs(a[pivot][k])) pivot = r;
    std::swap(a[k], a[pivot]);
    if (std::abs(a[k][k]) < 1e-12) throw std::runtime_error("oracle: singular system");
    for (std::size_t r = k + 1; r < dim; ++r) {
      double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c <= dim; ++c) a[r][c] -= f * a[k][c];
    }
  }
  std::vector<double> beta(dim, 0.0);
  for (std::size_t k = dim; k-- > 0;) {
    double s = a[k][dim];
    for (std::size_t c = k + 1; c < dim; ++c) s -= a[k][c] * beta[c];
    beta[k] = s / a[k][k];
  }
  return beta;  // beta[0] intercept, beta[1..] slopes
}

// Direct double-sum Gini, the oracle for the sorted implementation.
inline double gini_pairwise(const std::vector<double>& w) {
  double total = 0.0, diff = 0.0;
  for (double v : w) total += v;
  for (double a : w)
    for (double b : w) diff += std::abs(a - b);
  return diff / (2.0 * static_cast<double>(w.size()) * total);
}

}  // namespace testutil
