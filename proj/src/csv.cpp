#include "episim/csv.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>

#include "episim/error.hpp"

namespace episim::csv {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(begin));
      break;
    }
    fields.emplace_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
  return fields;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Kind::file_not_found,
                fmt::format("cannot open {}", path.string()));
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      table.header = split_line(line);
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size())
      throw Error(Error::Kind::row_parse,
                  fmt::format("{}:{}: expected {} fields, got {}", path.string(),
                              line_no, table.header.size(), fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty())
    throw Error(Error::Kind::header_mismatch,
                fmt::format("{}: empty file, no header", path.string()));
  return table;
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw Error(Error::Kind::row_parse,
                fmt::format("line {}: bad {} value '{}'", line, what, field));
  return value;
}

}  // namespace

std::int64_t parse_i64(std::string_view field, std::size_t line) {
  return parse_number<std::int64_t>(field, line, "integer");
}

std::uint64_t parse_u64(std::string_view field, std::size_t line) {
  return parse_number<std::uint64_t>(field, line, "unsigned integer");
}

double parse_double(std::string_view field, std::size_t line) {
  return parse_number<double>(field, line, "real");
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, ptr);
  if (out.find_first_of(".eEnif") == std::string::npos) out += ".0";
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

}  // namespace episim::csv
