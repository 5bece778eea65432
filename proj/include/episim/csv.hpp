#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace episim::csv {

// Plain comma-separated files, no quoting; that is all the data formats use.
// Readers are strict: ragged rows and trailing garbage in numeric fields are
// errors, so emitted files round-trip exactly.

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_line(std::string_view line);

Table read_file(const std::filesystem::path& path);

// Strict numeric parsing; the whole field must be consumed. `line` is the
// 1-based file line used in error messages.
std::int64_t parse_i64(std::string_view field, std::size_t line);
std::uint64_t parse_u64(std::string_view field, std::size_t line);
double parse_double(std::string_view field, std::size_t line);

// Shortest round-trip formatting, with a ".0" suffix for integral values so
// real-valued columns always read back as reals.
std::string format_real(double value);

std::string join(const std::vector<std::string>& fields);

}  // namespace episim::csv
