#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divisia/lmdi.hpp"
#include "divisia/panel.hpp"

namespace divisia {

/// Which effects count as mitigating: negative factor aggregates (default)
/// or negative (factor, sector) cells.
enum class SignScope { factor, sector };

/// Which household stock converts intensity to a total for an interval.
enum class HouseholdConvention { end, start, logmean };

struct MitigationRecord {
    Interval interval;
    double intensity = 0.0;        // kgCO2 per household
    double total = 0.0;            // MtCO2
    double households_used = 0.0;  // million households
    HouseholdConvention convention = HouseholdConvention::end;

    /// Records are labelled by the year the mitigation accrues to.
    int year() const { return interval.t1; }
};

/// Sum of absolute values of the negative contributions of an effect table.
double mitigation_intensity(const EffectTable& effects, SignScope scope = SignScope::factor);

/// Total mitigated mass: households (per convention) times intensity,
/// converted to MtCO2.
double mitigation_total(double intensity, const PanelDataset& panel, Interval interval,
                        HouseholdConvention convention = HouseholdConvention::end);

struct AssessOptions {
    SignScope sign_scope = SignScope::factor;
    HouseholdConvention convention = HouseholdConvention::end;
};

/// One mitigation record per chained annual step.
std::vector<MitigationRecord> assess_series(const ChainedResult& chained,
                                            const PanelDataset& panel,
                                            const AssessOptions& options = {});

struct Period {
    std::string label;
    int first_year = 0;
    int last_year = 0;
};

enum class MeanKind { simple, household_weighted };

struct PeriodAggregate {
    std::string label;
    int first_year = 0;
    int last_year = 0;
    double total = 0.0;           // MtCO2, sum over member years
    double mean_intensity = 0.0;  // kgCO2 per household-year
    int record_count = 0;
};

/// Sums records into non-overlapping labelled periods (records keyed by
/// their end year). Throws InputError if a period falls outside the span.
std::vector<PeriodAggregate> aggregate_periods(const std::vector<MitigationRecord>& records,
                                               const std::vector<Period>& periods,
                                               MeanKind mean_kind = MeanKind::simple);

struct ScaleSet {
    double per_household = 0.0;  // kgCO2 per household
    double per_capita = 0.0;     // kgCO2 per person
    double per_floor = 0.0;      // kgCO2 per m2
};

ScaleSet rescale(const MitigationRecord& record, const PanelDataset& panel);

struct CoalEquivalent {
    int year = 0;
    double mtce = 0.0;
    double factor = 0.0;  // tCO2 per tce actually applied
};

/// Energy-saving equivalent of each record: total / f, with f the supplied
/// constant or the end year's C/E ratio.
std::vector<CoalEquivalent> to_coal_equivalent(const std::vector<MitigationRecord>& records,
                                               const PanelDataset& panel,
                                               std::optional<double> factor = std::nullopt);

struct SavingsComparison {
    std::string label;
    double assessed = 0.0;  // Mtce
    double expected = 0.0;  // Mtce
    double coverage = 0.0;  // assessed / expected
};

/// Matches assessed and official savings by label. Throws InputError on a
/// label mismatch or a non-positive expected value.
std::vector<SavingsComparison> compare_official(
    const std::vector<std::pair<std::string, double>>& assessed,
    const std::vector<std::pair<std::string, double>>& official);

struct TrendFit {
    double slope = 0.0;      // per year
    double intercept = 0.0;  // value at year zero
    double r_squared = 0.0;  // 1 when the series has zero variance
};

/// Ordinary least squares over (year, value); needs at least two points.
TrendFit fit_trend(const std::vector<std::pair<int, double>>& series);

enum class BandKind { absolute, relative };

struct UncertaintyBand {
    double intensity_half_width = 0.0;  // kgCO2 per household, or fraction
    double total_half_width = 0.0;      // MtCO2, or fraction
    BandKind kind = BandKind::absolute;
};

struct BandedRecord {
    MitigationRecord record;
    double intensity_low = 0.0;
    double intensity_high = 0.0;
    double total_low = 0.0;
    double total_high = 0.0;
};

/// Interval bounds around each record; lower bounds are floored at zero.
std::vector<BandedRecord> apply_band(const std::vector<MitigationRecord>& records,
                                     const UncertaintyBand& band);

/// Period definitions file: header `label,first_year,last_year`.
std::vector<Period> load_periods(const std::filesystem::path& path);

/// Official targets file: header `label,expected_mtce`.
std::vector<std::pair<std::string, double>> load_targets(const std::filesystem::path& path);

/// Per-period sums of annual coal-equivalent savings.
std::vector<std::pair<std::string, double>> sum_savings_by_period(
    const std::vector<CoalEquivalent>& savings, const std::vector<Period>& periods);

} // namespace divisia
