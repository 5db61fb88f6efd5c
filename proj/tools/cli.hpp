#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace decoycli {

enum ExitCode { kOk = 0, kConfigError = 1, kIllDefined = 2 };

/// Runs the command line as `decoyqkd <command> [flags]`; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// One parsed row of a CSV document, keyed by header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index; throws std::runtime_error for an unknown name.
  std::size_t column(const std::string& name) const;
};

/// Parses the CSV written by `table` and `errstudy`. Throws std::runtime_error
/// with a line number on ragged rows.
CsvTable parse_csv(const std::string& text);

}  // namespace decoycli
