#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ugcqa/error.hpp"

namespace ugcqa {

// Splits one CSV record. Double quotes delimit fields containing commas;
// "" inside a quoted field is a literal quote.
std::vector<std::string> csv_split(std::string_view line);

// Joins fields into one CSV record, quoting only where needed.
std::string csv_join(const std::vector<std::string>& fields);

// Shortest decimal string that round-trips the exact double value.
std::string format_double(double v);

// Strict double parse of the whole field; throws ValidationError otherwise.
double parse_double(std::string_view s, std::string_view context);

// Strict nonnegative integer parse.
std::int64_t parse_int(std::string_view s, std::string_view context);

std::string_view trim(std::string_view s);

// Whole file as a string; throws ValidationError if unreadable.
std::string read_text_file(const std::filesystem::path& path);

// Writes atomically-ish (temp file + rename) so partial output never lands
// under the target name.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Text split into lines; accepts \n and \r\n, drops a trailing empty line.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace ugcqa
