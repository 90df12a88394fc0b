#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace datamap::cli {

/// Runs one subcommand (ingest, resolve, report, factors, compare, regions,
/// render). Returns 0 on success, 1 on input errors, 2 on internal errors.
/// Errors go to `err` as single-line JSON.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Convenience overload writing to std::cout / std::cerr.
int run(const std::vector<std::string>& args);

}  // namespace datamap::cli
