#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace v2g {

/// Numeric CSV: one header line, then rows of numbers. Lines starting with '#' are metadata.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;
};

/// Parses numeric CSV text. `expected_header`, when non-empty, must match exactly.
CsvTable parse_csv(const std::string& text, const std::vector<std::string>& expected_header = {},
                   const std::string& origin = "<memory>");

/// Throws IoError when the file is missing or malformed.
CsvTable read_csv(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header = {});

/// Shortest decimal text that round-trips a double.
std::string format_double(double v);

/// `# key=value` metadata lines written at the top of every output file.
using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_metadata(std::ostream& out, const Metadata& meta);

/// Writes text to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace v2g
