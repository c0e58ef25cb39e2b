#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace divisia {

/// A deterministic rectangular table. Rows are emitted in insertion order;
/// doubles are formatted with a fixed decimal count so repeated runs produce
/// byte-identical files.
struct Table {
    using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> cells);
};

/// Fixed-point formatting, `precision` decimals, round-half-even ties.
std::string format_number(double value, int precision);

std::string to_csv(const Table& table, int precision);
std::string to_json(const Table& table);

void write_csv(const Table& table, const std::filesystem::path& path, int precision);
void write_json(const Table& table, const std::filesystem::path& path);

} // namespace divisia
