#include "agemdp/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace agemdp {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
    bool first = true;
    for (auto h : header) put(h, first);
    end_row();
}

void CsvWriter::put(std::string_view cell, bool& first) {
    if (!first) os_ << ',';
    first = false;
    if (cell.find_first_of(",\"\n") == std::string_view::npos) {
        os_ << cell;
        return;
    }
    os_ << '"';
    for (char c : cell) {
        if (c == '"') os_ << '"';
        os_ << c;
    }
    os_ << '"';
}

void CsvWriter::end_row() { os_ << '\n'; }

}  // namespace agemdp
