#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace prl {

// Tab-separated table with a mandatory header row. Unknown columns are
// preserved so site-specific metadata survives a round trip.
struct TsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;          // throws ValidationError
    std::optional<std::size_t> find_column(const std::string& name) const;
    const std::string& cell(std::size_t row, std::size_t col) const { return rows[row][col]; }
};

TsvTable read_tsv(const std::string& path);
TsvTable parse_tsv(const std::string& text, const std::string& origin);
std::string serialize_tsv(const TsvTable& table);
void write_tsv(const std::string& path, const TsvTable& table);

// Deterministic numeric formatting for report tables.
std::string format_double(double v, int significant_digits = 12);

double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);

} // namespace prl
