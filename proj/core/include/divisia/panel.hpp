#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divisia/units.hpp"

namespace divisia {

/// One base quantity over a contiguous ascending range of years.
struct QuantitySeries {
    std::string symbol;
    Unit unit = Unit::Dimensionless;
    int first_year = 0;
    std::vector<double> values;

    int last_year() const { return first_year + static_cast<int>(values.size()) - 1; }
    bool covers(int year) const { return year >= first_year && year <= last_year(); }
    double at(int year) const;
};

/// Per-member series of one group dimension (age bands or energy carriers).
/// `series[base_symbol][member]` holds the member's annual values; `members`
/// preserves declaration order for deterministic iteration.
struct GroupBreakdown {
    std::string dim;
    std::vector<std::string> members;
    std::map<std::string, std::map<std::string, QuantitySeries>> series;

    bool has(const std::string& base) const { return series.count(base) != 0; }
    const QuantitySeries& member_series(const std::string& base, const std::string& member) const;
};

/// Immutable year-indexed panel of base quantities plus optional breakdowns.
struct PanelDataset {
    int first_year = 0;
    int last_year = 0;
    std::map<std::string, QuantitySeries> series;
    std::map<std::string, GroupBreakdown> groups;  // keyed by dimension name

    bool has(const std::string& symbol) const { return series.count(symbol) != 0; }
    const QuantitySeries& at(const std::string& symbol) const;
    double value(const std::string& symbol, int year) const;
    std::vector<int> years() const;
};

enum class Severity { info, warning, error };

struct Finding {
    Severity severity = Severity::info;
    std::optional<int> year;
    std::string symbol;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool passed() const;
    void add(Severity s, std::optional<int> year, std::string symbol, std::string message);
};

/// Maps one input column to a base quantity. `group`/`member` are set for
/// breakdown columns (e.g. E_coal -> symbol E, group carrier, member coal).
struct ColumnSpec {
    std::string column;
    std::string symbol;
    Unit unit = Unit::Dimensionless;
    std::string group;
    std::string member;
};

struct PanelSchema {
    std::string year_column = "year";
    std::vector<ColumnSpec> columns;

    /// Default residential layout: C, E, H, P, F, I, Pr plus the three
    /// age-band and five carrier columns, all in canonical units.
    static PanelSchema builtin();
};

PanelSchema load_schema(const std::filesystem::path& path);
void save_schema(const PanelSchema& schema, const std::filesystem::path& path);

struct LoadOptions {
    char delimiter = ',';
    bool renormalize_groups = false;  // rescale members to match the stored total
};

struct LoadedPanel {
    PanelDataset panel;
    std::vector<Finding> warnings;
};

/// Parses a delimited text file with a header row into a validated panel.
/// Throws InputError on structural defects (missing required column,
/// non-numeric cell, duplicate or non-contiguous years, non-positive stock),
/// IoError if the file cannot be read.
LoadedPanel load_panel(const std::filesystem::path& path,
                       const PanelSchema& schema = PanelSchema::builtin(),
                       const LoadOptions& options = {});

/// Inverse of load_panel for the same schema; values keep full precision so
/// a load -> write -> load round trip reproduces the panel exactly.
void write_panel(const PanelDataset& panel, const std::filesystem::path& path,
                 const PanelSchema& schema = PanelSchema::builtin());

/// Checks every panel invariant and reports findings; never throws on data
/// defects. Group-sum residuals above `group_tolerance` (relative) are errors.
ValidationReport validate_panel(const PanelDataset& panel, double group_tolerance = 1e-6);

/// Returns a copy extended with the derived series: c_h (kgCO2 per
/// household), K and per-carrier K_l, age shares s_j, and the identity
/// factors p, r, i, d, e. Idempotent.
PanelDataset derive_quantities(const PanelDataset& panel);

/// Symbols every residential panel must provide.
const std::vector<std::string>& required_symbols();

} // namespace divisia
