#include "divisia/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "divisia/errors.hpp"
#include "divisia/units.hpp"

namespace divisia {
namespace {

double household_stock(const PanelDataset& panel, Interval interval,
                       HouseholdConvention convention)
{
    switch (convention) {
    case HouseholdConvention::end: return panel.value("H", interval.t1);
    case HouseholdConvention::start: return panel.value("H", interval.t0);
    case HouseholdConvention::logmean:
        return log_mean(panel.value("H", interval.t1), panel.value("H", interval.t0));
    }
    throw InputError("unknown household convention");
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

double mitigation_intensity(const EffectTable& effects, SignScope scope)
{
    double sum = 0.0;
    if (scope == SignScope::factor || effects.sector_effects.empty()) {
        if (scope == SignScope::sector && effects.sector_effects.empty() &&
            effects.mode == DecomposeMode::aggregate) {
            throw InputError("sector sign scope requires a sectoral effect table");
        }
        for (double e : effects.effects) {
            if (e < 0.0) sum += -e;
        }
        return sum;
    }
    for (const auto& row : effects.sector_effects) {
        for (double cell : row) {
            if (cell < 0.0) sum += -cell;
        }
    }
    return sum;
}

double mitigation_total(double intensity, const PanelDataset& panel, Interval interval,
                        HouseholdConvention convention)
{
    const double households = household_stock(panel, interval, convention);
    // kgCO2/household -> MtCO2 per million households, times stock
    const double per_million = intensity * conversion_factor(Unit::kgCO2PerHousehold,
                                                             Unit::MtCO2PerMhousehold);
    return households * per_million;
}

std::vector<MitigationRecord> assess_series(const ChainedResult& chained,
                                            const PanelDataset& panel,
                                            const AssessOptions& options)
{
    std::vector<MitigationRecord> records;
    records.reserve(chained.steps.size());
    for (const auto& step : chained.steps) {
        MitigationRecord record;
        record.interval = step.interval;
        record.convention = options.convention;
        record.intensity = mitigation_intensity(step, options.sign_scope);
        record.households_used = household_stock(panel, step.interval, options.convention);
        record.total = mitigation_total(record.intensity, panel, step.interval,
                                        options.convention);
        records.push_back(record);
    }
    return records;
}

std::vector<PeriodAggregate> aggregate_periods(const std::vector<MitigationRecord>& records,
                                               const std::vector<Period>& periods,
                                               MeanKind mean_kind)
{
    if (records.empty()) throw InputError("no mitigation records to aggregate");
    const int span_first = records.front().year();
    const int span_last = records.back().year();

    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto& p = periods[i];
        if (p.first_year > p.last_year) {
            throw InputError("period '" + p.label + "' has a reversed year range");
        }
        if (p.first_year < span_first || p.last_year > span_last) {
            throw InputError("period '" + p.label + "' outside record span " +
                             std::to_string(span_first) + "-" + std::to_string(span_last));
        }
        for (std::size_t j = i + 1; j < periods.size(); ++j) {
            if (p.first_year <= periods[j].last_year && periods[j].first_year <= p.last_year) {
                throw InputError("periods '" + p.label + "' and '" + periods[j].label +
                                 "' overlap");
            }
        }
    }

    std::vector<PeriodAggregate> out;
    out.reserve(periods.size());
    for (const auto& p : periods) {
        PeriodAggregate agg;
        agg.label = p.label;
        agg.first_year = p.first_year;
        agg.last_year = p.last_year;
        double intensity_sum = 0.0;
        double weight_sum = 0.0;
        for (const auto& r : records) {
            if (r.year() < p.first_year || r.year() > p.last_year) continue;
            agg.total += r.total;
            const double w = mean_kind == MeanKind::household_weighted ? r.households_used : 1.0;
            intensity_sum += w * r.intensity;
            weight_sum += w;
            ++agg.record_count;
        }
        if (agg.record_count == 0) {
            throw InputError("period '" + p.label + "' contains no records");
        }
        agg.mean_intensity = intensity_sum / weight_sum;
        out.push_back(std::move(agg));
    }
    return out;
}

ScaleSet rescale(const MitigationRecord& record, const PanelDataset& panel)
{
    ScaleSet scales;
    scales.per_household = record.intensity;
    scales.per_capita = conversion_factor(Unit::MtCO2PerMperson, Unit::kgCO2PerPerson) *
                        record.total / panel.value("P", record.year());
    scales.per_floor = conversion_factor(Unit::MtCO2PerMm2, Unit::kgCO2PerM2) *
                       record.total / panel.value("F", record.year());
    return scales;
}

std::vector<CoalEquivalent> to_coal_equivalent(const std::vector<MitigationRecord>& records,
                                               const PanelDataset& panel,
                                               std::optional<double> factor)
{
    if (factor && !(*factor > 0.0)) {
        throw InputError("coal-equivalent factor must be positive");
    }
    std::vector<CoalEquivalent> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        CoalEquivalent ce;
        ce.year = r.year();
        // C[MtCO2]/E[Mtce] is numerically tCO2 per tce
        ce.factor = factor ? *factor : panel.value("C", r.year()) / panel.value("E", r.year());
        ce.mtce = r.total / ce.factor;
        out.push_back(ce);
    }
    return out;
}

std::vector<SavingsComparison> compare_official(
    const std::vector<std::pair<std::string, double>>& assessed,
    const std::vector<std::pair<std::string, double>>& official)
{
    std::vector<SavingsComparison> out;
    out.reserve(official.size());
    for (const auto& [label, expected] : official) {
        auto it = std::find_if(assessed.begin(), assessed.end(),
                               [&](const auto& a) { return a.first == label; });
        if (it == assessed.end()) {
            throw InputError("no assessed savings for period '" + label + "'");
        }
        if (!(expected > 0.0)) {
            throw InputError("expected savings for '" + label + "' must be positive");
        }
        out.push_back({label, it->second, expected, it->second / expected});
    }
    return out;
}

TrendFit fit_trend(const std::vector<std::pair<int, double>>& series)
{
    if (series.size() < 2) throw InputError("trend fit needs at least two points");

    const double n = static_cast<double>(series.size());
    double x_mean = 0.0, y_mean = 0.0;
    for (const auto& [x, y] : series) {
        x_mean += x;
        y_mean += y;
    }
    x_mean /= n;
    y_mean /= n;

    double sxx = 0.0, sxy = 0.0, sst = 0.0;
    for (const auto& [x, y] : series) {
        const double dx = x - x_mean;
        const double dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        sst += dy * dy;
    }
    if (sxx == 0.0) throw InputError("trend fit needs at least two distinct years");

    TrendFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    double ssr = 0.0;
    for (const auto& [x, y] : series) {
        const double r = y - (fit.intercept + fit.slope * x);
        ssr += r * r;
    }
    fit.r_squared = sst == 0.0 ? 1.0 : 1.0 - ssr / sst;
    return fit;
}

std::vector<BandedRecord> apply_band(const std::vector<MitigationRecord>& records,
                                     const UncertaintyBand& band)
{
    if (band.intensity_half_width < 0.0 || band.total_half_width < 0.0) {
        throw InputError("band half-widths must be non-negative");
    }
    std::vector<BandedRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const double hw_i = band.kind == BandKind::absolute
                                ? band.intensity_half_width
                                : band.intensity_half_width * r.intensity;
        const double hw_t = band.kind == BandKind::absolute
                                ? band.total_half_width
                                : band.total_half_width * r.total;
        BandedRecord b;
        b.record = r;
        b.intensity_low = std::max(0.0, r.intensity - hw_i);
        b.intensity_high = r.intensity + hw_i;
        b.total_low = std::max(0.0, r.total - hw_t);
        b.total_high = r.total + hw_t;
        out.push_back(b);
    }
    return out;
}

std::vector<Period> load_periods(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open periods file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty periods file: " + path.string());
    std::vector<Period> periods;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw InputError("periods file row " + std::to_string(row) +
                             ": expected label,first_year,last_year");
        }
        try {
            periods.push_back({fields[0], std::stoi(fields[1]), std::stoi(fields[2])});
        } catch (const std::exception&) {
            throw InputError("periods file row " + std::to_string(row) + ": bad year");
        }
    }
    if (periods.empty()) throw InputError("periods file has no rows: " + path.string());
    return periods;
}

std::vector<std::pair<std::string, double>> load_targets(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open targets file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty targets file: " + path.string());
    std::vector<std::pair<std::string, double>> targets;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw InputError("targets file row " + std::to_string(row) +
                             ": expected label,expected_mtce");
        }
        try {
            targets.emplace_back(fields[0], std::stod(fields[1]));
        } catch (const std::exception&) {
            throw InputError("targets file row " + std::to_string(row) + ": bad value");
        }
    }
    if (targets.empty()) throw InputError("targets file has no rows: " + path.string());
    return targets;
}

std::vector<std::pair<std::string, double>> sum_savings_by_period(
    const std::vector<CoalEquivalent>& savings, const std::vector<Period>& periods)
{
    std::vector<std::pair<std::string, double>> out;
    out.reserve(periods.size());
    for (const auto& p : periods) {
        double sum = 0.0;
        for (const auto& s : savings) {
            if (s.year >= p.first_year && s.year <= p.last_year) sum += s.mtce;
        }
        out.emplace_back(p.label, sum);
    }
    return out;
}

} // namespace divisia
