#include "divisia/panel.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "divisia/errors.hpp"

namespace divisia {
namespace {

using nlohmann::json;

std::string format_residual(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1e", r);
    // "2.0e-02" -> "2.0e-2"
    std::string s(buf);
    const auto e = s.find('e');
    if (e != std::string::npos) {
        auto digits = e + 2;
        while (digits + 1 < s.size() && s[digits] == '0') s.erase(digits, 1);
    }
    return s;
}

bool is_member_symbol(const PanelDataset& panel, const std::string& symbol)
{
    for (const auto& [dim, group] : panel.groups) {
        if (group.has(symbol)) return true;
    }
    return false;
}

std::vector<std::string> split_line(const std::string& line, char delimiter)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delimiter)) fields.push_back(field);
    if (!line.empty() && line.back() == delimiter) fields.emplace_back();
    return fields;
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t row)
{
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE || !std::isfinite(v)) {
        throw InputError("non-numeric cell in column '" + column + "', data row " +
                         std::to_string(row) + ": '" + cell + "'");
    }
    return v;
}

} // namespace

double QuantitySeries::at(int year) const
{
    if (!covers(year)) {
        throw InputError("year " + std::to_string(year) + " outside series '" + symbol + "'");
    }
    return values[static_cast<std::size_t>(year - first_year)];
}

const QuantitySeries& GroupBreakdown::member_series(const std::string& base,
                                                    const std::string& member) const
{
    auto base_it = series.find(base);
    if (base_it == series.end()) {
        throw InputError("group '" + dim + "' has no breakdown of symbol '" + base + "'");
    }
    auto member_it = base_it->second.find(member);
    if (member_it == base_it->second.end()) {
        throw InputError("group '" + dim + "' has no member '" + member + "'");
    }
    return member_it->second;
}

const QuantitySeries& PanelDataset::at(const std::string& symbol) const
{
    auto it = series.find(symbol);
    if (it == series.end()) throw InputError("symbol '" + symbol + "' absent from panel");
    return it->second;
}

double PanelDataset::value(const std::string& symbol, int year) const
{
    return at(symbol).at(year);
}

std::vector<int> PanelDataset::years() const
{
    std::vector<int> out;
    for (int y = first_year; y <= last_year; ++y) out.push_back(y);
    return out;
}

bool ValidationReport::passed() const
{
    return std::none_of(findings.begin(), findings.end(),
                        [](const Finding& f) { return f.severity == Severity::error; });
}

void ValidationReport::add(Severity s, std::optional<int> year, std::string symbol,
                           std::string message)
{
    findings.push_back({s, year, std::move(symbol), std::move(message)});
}

const std::vector<std::string>& required_symbols()
{
    static const std::vector<std::string> symbols{"C", "E", "H", "P", "F", "I", "Pr"};
    return symbols;
}

PanelSchema PanelSchema::builtin()
{
    PanelSchema s;
    s.columns = {
        {"C", "C", Unit::MtCO2, "", ""},
        {"E", "E", Unit::Mtce, "", ""},
        {"H", "H", Unit::Mhousehold, "", ""},
        {"P", "P", Unit::Mperson, "", ""},
        {"F", "F", Unit::Mm2, "", ""},
        {"I", "I", Unit::Currency, "", ""},
        {"Pr", "Pr", Unit::CurrencyPerM2, "", ""},
        {"P_age_0_14", "P", Unit::Mperson, "age", "0-14"},
        {"P_age_15_64", "P", Unit::Mperson, "age", "15-64"},
        {"P_age_65p", "P", Unit::Mperson, "age", "65+"},
        {"E_coal", "E", Unit::Mtce, "carrier", "coal"},
        {"E_oil", "E", Unit::Mtce, "carrier", "oil"},
        {"E_gas", "E", Unit::Mtce, "carrier", "gas"},
        {"E_elec", "E", Unit::Mtce, "carrier", "elec"},
        {"E_heat", "E", Unit::Mtce, "carrier", "heat"},
        {"C_coal", "C", Unit::MtCO2, "carrier", "coal"},
        {"C_oil", "C", Unit::MtCO2, "carrier", "oil"},
        {"C_gas", "C", Unit::MtCO2, "carrier", "gas"},
        {"C_elec", "C", Unit::MtCO2, "carrier", "elec"},
        {"C_heat", "C", Unit::MtCO2, "carrier", "heat"},
    };
    return s;
}

PanelSchema load_schema(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InputError("schema parse error in " + path.string() + ": " + e.what());
    }
    PanelSchema schema;
    schema.year_column = doc.value("year_column", "year");
    if (!doc.contains("columns") || !doc["columns"].is_array()) {
        throw InputError("schema file lacks a 'columns' array: " + path.string());
    }
    for (const auto& c : doc["columns"]) {
        ColumnSpec spec;
        spec.column = c.at("column").get<std::string>();
        spec.symbol = c.at("symbol").get<std::string>();
        const auto unit_text = c.at("unit").get<std::string>();
        auto unit = parse_unit(unit_text);
        if (!unit) throw InputError("unknown unit '" + unit_text + "' in schema");
        spec.unit = *unit;
        spec.group = c.value("group", "");
        spec.member = c.value("member", "");
        if (spec.group.empty() != spec.member.empty()) {
            throw InputError("schema column '" + spec.column +
                             "': group and member must be set together");
        }
        schema.columns.push_back(std::move(spec));
    }
    return schema;
}

void save_schema(const PanelSchema& schema, const std::filesystem::path& path)
{
    json doc;
    doc["year_column"] = schema.year_column;
    doc["columns"] = json::array();
    for (const auto& c : schema.columns) {
        json col{{"column", c.column}, {"symbol", c.symbol},
                 {"unit", std::string(unit_name(c.unit))}};
        if (!c.group.empty()) {
            col["group"] = c.group;
            col["member"] = c.member;
        }
        doc["columns"].push_back(std::move(col));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write schema file: " + path.string());
    out << doc.dump(2) << '\n';
}

LoadedPanel load_panel(const std::filesystem::path& path, const PanelSchema& schema,
                       const LoadOptions& options)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open panel file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw InputError("empty panel file: " + path.string());
    if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);

    const auto header = split_line(line, options.delimiter);
    std::vector<const ColumnSpec*> column_map(header.size(), nullptr);
    int year_index = -1;
    LoadedPanel result;

    std::set<std::string> seen_columns;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& name = header[i];
        if (name == schema.year_column) {
            year_index = static_cast<int>(i);
            continue;
        }
        const ColumnSpec* match = nullptr;
        for (const auto& spec : schema.columns) {
            if (spec.column == name) {
                match = &spec;
                break;
            }
        }
        if (!match) {
            result.warnings.push_back(
                {Severity::warning, std::nullopt, name, "unknown column ignored"});
            continue;
        }
        if (!seen_columns.insert(name).second) {
            throw InputError("duplicate column '" + name + "'");
        }
        column_map[i] = match;
    }
    if (year_index < 0) {
        throw InputError("missing required column '" + schema.year_column + "'");
    }
    for (const auto& required : required_symbols()) {
        bool found = false;
        for (const auto& spec : schema.columns) {
            if (spec.symbol == required && spec.group.empty() &&
                seen_columns.count(spec.column)) {
                found = true;
                break;
            }
        }
        if (!found) throw InputError("missing required column for symbol '" + required + "'");
    }

    std::vector<int> years;
    std::vector<std::vector<double>> cells(header.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = split_line(line, options.delimiter);
        if (fields.size() != header.size()) {
            throw InputError("data row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(header.size()));
        }
        const double year_value =
            parse_cell(fields[static_cast<std::size_t>(year_index)], schema.year_column, row);
        const int year = static_cast<int>(year_value);
        if (static_cast<double>(year) != year_value) {
            throw InputError("non-integer year in data row " + std::to_string(row));
        }
        if (std::find(years.begin(), years.end(), year) != years.end()) {
            throw InputError("duplicate year " + std::to_string(year));
        }
        years.push_back(year);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (!column_map[i]) continue;
            cells[i].push_back(parse_cell(fields[i], header[i], row));
        }
    }
    if (years.empty()) throw InputError("panel file has no data rows");

    // rows may arrive unordered; sort then require contiguity
    std::vector<std::size_t> order(years.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return years[a] < years[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (years[order[i]] != years[order[i - 1]] + 1) {
            throw InputError("non-contiguous years: " + std::to_string(years[order[i - 1]]) +
                             " followed by " + std::to_string(years[order[i]]));
        }
    }

    PanelDataset panel;
    panel.first_year = years[order.front()];
    panel.last_year = years[order.back()];

    for (std::size_t i = 0; i < header.size(); ++i) {
        const ColumnSpec* spec = column_map[i];
        if (!spec) continue;
        QuantitySeries series;
        series.symbol = spec->symbol;
        series.unit = canonical_unit(dimension(spec->unit));
        series.first_year = panel.first_year;
        series.values.resize(years.size());
        const double to_canonical = conversion_factor(spec->unit, series.unit);
        for (std::size_t k = 0; k < order.size(); ++k) {
            series.values[k] = cells[i][order[k]] * to_canonical;
        }

        const bool is_member = !spec->group.empty();
        for (std::size_t k = 0; k < series.values.size(); ++k) {
            const double v = series.values[k];
            const int year = panel.first_year + static_cast<int>(k);
            if (!is_member && v <= 0.0) {
                throw InputError("non-positive stock value: " + spec->symbol + " = " +
                                 std::to_string(v) + " in year " + std::to_string(year));
            }
            if (is_member && v < 0.0) {
                throw InputError("negative member value: " + spec->column + " in year " +
                                 std::to_string(year));
            }
            if (is_member && v == 0.0) {
                result.warnings.push_back({Severity::warning, year, spec->column,
                                           "zero member value (zero policy applies)"});
            }
        }

        if (is_member) {
            auto& group = panel.groups[spec->group];
            group.dim = spec->group;
            if (std::find(group.members.begin(), group.members.end(), spec->member) ==
                group.members.end()) {
                group.members.push_back(spec->member);
            }
            series.symbol = spec->symbol;
            group.series[spec->symbol][spec->member] = std::move(series);
        } else {
            panel.series[spec->symbol] = std::move(series);
        }
    }

    if (options.renormalize_groups) {
        for (auto& [dim, group] : panel.groups) {
            for (auto& [base, members] : group.series) {
                if (!panel.has(base)) continue;
                const auto& total = panel.at(base);
                for (int year = panel.first_year; year <= panel.last_year; ++year) {
                    double sum = 0.0;
                    for (const auto& [member, series] : members) sum += series.at(year);
                    if (sum <= 0.0) continue;
                    const double scale = total.at(year) / sum;
                    for (auto& [member, series] : members) {
                        series.values[static_cast<std::size_t>(year - panel.first_year)] *= scale;
                    }
                }
            }
        }
    }

    result.panel = std::move(panel);
    return result;
}

void write_panel(const PanelDataset& panel, const std::filesystem::path& path,
                 const PanelSchema& schema)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write panel file: " + path.string());

    std::vector<const ColumnSpec*> present;
    for (const auto& spec : schema.columns) {
        if (spec.group.empty()) {
            if (panel.has(spec.symbol)) present.push_back(&spec);
        } else {
            auto it = panel.groups.find(spec.group);
            if (it != panel.groups.end() && it->second.has(spec.symbol) &&
                it->second.series.at(spec.symbol).count(spec.member)) {
                present.push_back(&spec);
            }
        }
    }

    out << schema.year_column;
    for (const auto* spec : present) out << ',' << spec->column;
    out << '\n';

    char buf[40];
    for (int year = panel.first_year; year <= panel.last_year; ++year) {
        out << year;
        for (const auto* spec : present) {
            const QuantitySeries& series =
                spec->group.empty() ? panel.at(spec->symbol)
                                    : panel.groups.at(spec->group).member_series(spec->symbol,
                                                                                 spec->member);
            const double v = series.at(year) * conversion_factor(series.unit, spec->unit);
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("error while writing panel file: " + path.string());
}

ValidationReport validate_panel(const PanelDataset& panel, double group_tolerance)
{
    ValidationReport report;

    for (const auto& required : required_symbols()) {
        if (!panel.has(required)) {
            report.add(Severity::error, std::nullopt, required, "missing required symbol");
        }
    }

    for (const auto& [symbol, series] : panel.series) {
        if (series.first_year != panel.first_year || series.last_year() != panel.last_year) {
            report.add(Severity::error, std::nullopt, symbol,
                       "series year range differs from panel range");
            continue;
        }
        for (int year = series.first_year; year <= series.last_year(); ++year) {
            const double v = series.at(year);
            if (!std::isfinite(v)) {
                report.add(Severity::error, year, symbol, "non-finite value");
            } else if (v <= 0.0 && !is_member_symbol(panel, symbol)) {
                report.add(Severity::error, year, symbol, "non-positive stock value");
            }
        }
    }

    if (panel.groups.empty()) {
        report.add(Severity::info, std::nullopt, "", "no group dimensions");
    }

    for (const auto& [dim, group] : panel.groups) {
        for (const auto& [base, members] : group.series) {
            for (const auto& [member, series] : members) {
                if (series.first_year != panel.first_year ||
                    series.last_year() != panel.last_year) {
                    report.add(Severity::error, std::nullopt, base + "[" + member + "]",
                               "member series year range differs from panel range");
                }
                for (int year = panel.first_year; year <= panel.last_year; ++year) {
                    const double v = series.at(year);
                    if (v < 0.0) {
                        report.add(Severity::error, year, base + "[" + member + "]",
                                   "negative member value");
                    } else if (v == 0.0) {
                        report.add(Severity::warning, year, base + "[" + member + "]",
                                   "zero member value (zero policy applies)");
                    }
                }
            }
            if (!panel.has(base)) continue;
            const auto& total = panel.at(base);
            const std::string what = base == "E"   ? "energy"
                                     : base == "C" ? "emission"
                                     : base == "P" ? "population"
                                                   : base;
            for (int year = panel.first_year; year <= panel.last_year; ++year) {
                double sum = 0.0;
                for (const auto& [member, series] : members) sum += series.at(year);
                const double residual = std::abs(sum - total.at(year)) / total.at(year);
                if (residual > group_tolerance) {
                    report.add(Severity::error, year, base,
                               dim + " " + what + " sum residual " + format_residual(residual));
                }
            }
        }
    }

    return report;
}

PanelDataset derive_quantities(const PanelDataset& panel)
{
    PanelDataset out = panel;

    auto put = [&](const std::string& symbol, Unit unit, auto&& f) {
        QuantitySeries s;
        s.symbol = symbol;
        s.unit = unit;
        s.first_year = out.first_year;
        s.values.reserve(static_cast<std::size_t>(out.last_year - out.first_year + 1));
        for (int year = out.first_year; year <= out.last_year; ++year) s.values.push_back(f(year));
        out.series[symbol] = std::move(s);
    };

    const double kg_per_household = conversion_factor(Unit::MtCO2PerMhousehold,
                                                      Unit::kgCO2PerHousehold);
    put("c_h", Unit::kgCO2PerHousehold, [&](int y) {
        return kg_per_household * panel.value("C", y) / panel.value("H", y);
    });
    put("K", Unit::tCO2PerTce, [&](int y) { return panel.value("C", y) / panel.value("E", y); });
    put("p", Unit::Dimensionless, [&](int y) { return panel.value("P", y) / panel.value("H", y); });
    put("i", Unit::Dimensionless, [&](int y) { return panel.value("I", y) / panel.value("P", y); });
    put("d", Unit::Dimensionless, [&](int y) { return 1.0 / panel.value("Pr", y); });
    put("e", Unit::Dimensionless, [&](int y) { return panel.value("E", y) / panel.value("F", y); });
    put("r", Unit::Dimensionless, [&](int y) {
        return panel.value("F", y) * panel.value("Pr", y) / panel.value("I", y);
    });

    // grouped derivations: age shares and per-carrier emission factors
    auto age = out.groups.find("age");
    if (age != out.groups.end() && age->second.has("P")) {
        auto& shares = age->second.series["s"];
        for (const auto& member : age->second.members) {
            const auto& pj = age->second.member_series("P", member);
            QuantitySeries s;
            s.symbol = "s";
            s.unit = Unit::Dimensionless;
            s.first_year = out.first_year;
            for (int year = out.first_year; year <= out.last_year; ++year) {
                s.values.push_back(pj.at(year) / panel.value("P", year));
            }
            shares[member] = std::move(s);
        }
    }
    auto carrier = out.groups.find("carrier");
    if (carrier != out.groups.end() && carrier->second.has("C")) {
        auto& factors = carrier->second.series["K"];
        for (const auto& member : carrier->second.members) {
            const auto& cl = carrier->second.member_series("C", member);
            QuantitySeries s;
            s.symbol = "K";
            s.unit = Unit::tCO2PerTce;
            s.first_year = out.first_year;
            for (int year = out.first_year; year <= out.last_year; ++year) {
                s.values.push_back(cl.at(year) / panel.value("E", year));
            }
            factors[member] = std::move(s);
        }
    }

    return out;
}

} // namespace divisia
