#pragma once

#include <string>
#include <vector>

namespace sdoh {

/// Splits one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> csv_split(const std::string& line);

/// Quotes a field when it contains a comma, quote, or newline.
std::string csv_field(const std::string& value);

std::string csv_join(const std::vector<std::string>& fields);

/// Reads a whole CSV file into rows of fields. Blank lines are skipped.
/// Throws std::runtime_error when the file cannot be opened.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace sdoh
