#include "divisia/report.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "divisia/errors.hpp"

namespace divisia {
namespace {

bool needs_quoting(const std::string& s)
{
    return s.find_first_of(",\"\n") != std::string::npos;
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

void Table::add_row(std::vector<Cell> cells)
{
    if (cells.size() != columns.size()) {
        throw InputError("table '" + name + "': row width " + std::to_string(cells.size()) +
                         " does not match " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(cells));
}

std::string format_number(double value, int precision)
{
    const int length = std::snprintf(nullptr, 0, "%.*f", precision, value);
    std::string s(static_cast<std::size_t>(length), '\0');
    std::snprintf(s.data(), s.size() + 1, "%.*f", precision, value);
    // avoid the distinct "-0.000000" spelling for negative zeros
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    return s;
}

std::string to_csv(const Table& table, int precision)
{
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += needs_quoting(table.columns[i]) ? quote(table.columns[i]) : table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            const auto& cell = row[i];
            if (std::holds_alternative<std::int64_t>(cell)) {
                out += std::to_string(std::get<std::int64_t>(cell));
            } else if (std::holds_alternative<double>(cell)) {
                out += format_number(std::get<double>(cell), precision);
            } else if (std::holds_alternative<std::string>(cell)) {
                const auto& s = std::get<std::string>(cell);
                out += needs_quoting(s) ? quote(s) : s;
            }
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const Table& table)
{
    nlohmann::json doc;
    doc["name"] = table.name;
    doc["columns"] = table.columns;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : row) {
            if (std::holds_alternative<std::int64_t>(cell)) {
                cells.push_back(std::get<std::int64_t>(cell));
            } else if (std::holds_alternative<double>(cell)) {
                cells.push_back(std::get<double>(cell));
            } else if (std::holds_alternative<std::string>(cell)) {
                cells.push_back(std::get<std::string>(cell));
            } else {
                cells.push_back(nullptr);
            }
        }
        doc["rows"].push_back(std::move(cells));
    }
    return doc.dump(1) + "\n";
}

void write_csv(const Table& table, const std::filesystem::path& path, int precision)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_csv(table, precision);
    if (!out) throw IoError("error while writing " + path.string());
}

void write_json(const Table& table, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(table);
    if (!out) throw IoError("error while writing " + path.string());
}

} // namespace divisia
