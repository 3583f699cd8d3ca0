#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace invt::csv {

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

/// Reads one record (RFC 4180 quoting). Returns false at end of input.
bool read_row(std::istream& is, std::vector<std::string>& fields);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace invt::csv
