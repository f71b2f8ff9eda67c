#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sosim/core.hpp"

namespace sosim {

struct GmlEntry;

struct GmlList {
  std::vector<GmlEntry> entries;

  const GmlEntry* find(std::string_view key) const;
};

struct GmlValue {
  std::variant<long long, double, std::string, GmlList> data;
  int line = 0;
};

struct GmlEntry {
  std::string key;
  GmlValue value;
};

/// Generic key/value tree. Throws ParseError with the offending line.
GmlList parse_gml(std::string_view text);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

std::string to_gml(const Network& net);
std::size_t write_gml(const Network& net, std::ostream& out);
void write_gml_file(const Network& net, const std::string& path);

/// Throws ParseError / SchemaError. Unknown attributes are skipped and
/// reported through `warnings` when given.
Network network_from_gml(const GmlList& doc, std::vector<std::string>* warnings = nullptr);
Network read_gml(std::string_view text, std::vector<std::string>* warnings = nullptr);
Network read_gml_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace sosim
