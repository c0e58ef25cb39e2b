#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "divisia/identity.hpp"
#include "divisia/panel.hpp"

namespace divisia {

/// Logarithmic mean, L(a,b) = (a-b)/(ln a - ln b), with the analytic limit
/// L(a,a) = a. Requires a > 0 and b > 0; lies between min(a,b) and max(a,b).
double log_mean(double a, double b);

struct Interval {
    int t0 = 0;
    int t1 = 0;
};

enum class DecomposeMode { aggregate, sectoral };

/// Behaviour of the L weight when its two arguments are equal. The analytic
/// limit preserves per-factor attribution when the aggregate is unchanged;
/// zero_at_equal zeroes every term of an unchanged interval instead.
enum class LogMeanVariant { analytic_limit, zero_at_equal };

/// Handling of zero member values. delta_substitute replaces a zero with
/// 1e-10 times the member's maximum over the panel years; reject throws.
enum class ZeroPolicy { delta_substitute, reject };

struct DecomposeOptions {
    LogMeanVariant log_mean_variant = LogMeanVariant::analytic_limit;
    ZeroPolicy zero_policy = ZeroPolicy::delta_substitute;
    double closure_tolerance = 1e-9;
};

struct GroupAxis {
    std::string dim;
    std::vector<std::string> members;
};

/// Additive effects of one interval, in the target's report unit.
/// In sectoral mode each factor also carries its per-sector terms; the
/// reported factor effect is exactly their sum.
struct EffectTable {
    Interval interval;
    DecomposeMode mode = DecomposeMode::aggregate;
    double delta_total = 0.0;
    std::vector<std::string> factor_names;
    std::vector<double> effects;
    std::vector<GroupAxis> axes;                      // sectoral mode, 0..2 axes
    std::vector<std::vector<double>> sector_effects;  // [factor][sector]

    double effect(std::string_view factor_name) const;
    double sum_effects() const;
    std::size_t sector_count() const;
    /// Member labels of sector `s`, one per axis (axis 0 varies slowest).
    std::vector<std::string> sector_members(std::size_t s) const;
};

/// Additive LMDI-I decomposition of the target change over one interval.
/// Aggregate mode applies L(target_t1, target_t0) * ln(x_t1/x_t0) per factor;
/// sectoral mode sums per-sector terms over the cross product of group
/// members. Effects sum to the target change exactly (1e-9 relative).
EffectTable decompose_interval(const IdentitySpec& spec, const PanelDataset& panel,
                               Interval interval,
                               DecomposeMode mode = DecomposeMode::sectoral,
                               const DecomposeOptions& options = {});

struct ChainedResult {
    Interval span;
    std::vector<EffectTable> steps;  // one per consecutive year pair

    double delta_total() const;
};

ChainedResult chain_decompose(const IdentitySpec& spec, const PanelDataset& panel,
                              Interval span,
                              DecomposeMode mode = DecomposeMode::sectoral,
                              const DecomposeOptions& options = {});

/// Splits a parent factor effect across group members with logarithmic-mean
/// share weights w_m = L(m_t1, m_t0) / sum L; attributions sum to the parent
/// effect exactly. Member lists must align.
std::vector<std::pair<std::string, double>> attribute_group(
    double parent_effect,
    const std::vector<std::pair<std::string, double>>& members_t0,
    const std::vector<std::pair<std::string, double>>& members_t1);

} // namespace divisia
