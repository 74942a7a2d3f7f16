#pragma once

#include <concepts>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

namespace agemdp {

/// Locale-independent rendering with 12 significant digits.
std::string format_number(double value);

/// Minimal CSV emitter. Writes the header on construction; numeric cells go
/// through format_number so output is identical across locales.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        (write_cell(cells, first), ...);
        end_row();
    }

private:
    void write_cell(double v, bool& first) { put(format_number(v), first); }
    void write_cell(std::string_view v, bool& first) { put(v, first); }
    void write_cell(const std::string& v, bool& first) { put(v, first); }
    void write_cell(const char* v, bool& first) { put(std::string_view(v), first); }
    template <std::integral T>
    void write_cell(T v, bool& first) {
        put(std::to_string(v), first);
    }

    void put(std::string_view cell, bool& first);
    void end_row();

    std::ostream& os_;
};

}  // namespace agemdp
