#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ssa::csv {

using Row = std::vector<std::string>;

/// Reads comma-delimited records. Fields may be double-quoted; inside quotes
/// `""` is a literal quote and commas/newlines are data. A trailing '\r' is
/// stripped so CRLF files read the same as LF files. Blank lines and lines
/// starting with '#' are skipped.
std::vector<Row> read(std::istream& in);

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace ssa::csv
