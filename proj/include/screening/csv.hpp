#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace screening::csv {

using Row = std::vector<std::string>;

// RFC 4180 style: comma separated, optional double quotes, "" escapes a quote.
std::vector<Row> read(std::istream& in);
std::vector<Row> read_file(const std::string& path);

void write_row(std::ostream& out, const Row& row);

}  // namespace screening::csv
