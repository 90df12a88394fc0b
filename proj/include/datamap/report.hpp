#pragma once

#include <optional>
#include <string>

#include "datamap/registry.hpp"
#include "datamap/resolver.hpp"
#include "datamap/stats.hpp"

namespace datamap {

struct ReportOptions {
  double threshold = 0.0;     // unrepresented cutoff
  bool reproducible = false;  // drop generated_at so outputs are byte-stable
  bool gini_restricted = false;  // gini over weighted countries only, not the
                                 // full registry universe
  std::optional<std::string> generated_at;  // override for tests
};

/// Machine-readable report over a dataset map: totals plus every
/// representativeness statistic. Statistic failures (an empty map, say)
/// null the field and leave a note instead of aborting the report. Output
/// has sorted keys and is byte-stable modulo generated_at.
std::string emit_report(const DatasetMap& map, const LanguageProfile* profile,
                        const CountryRegistry& registry, const ReportOptions& options = {});

}  // namespace datamap
