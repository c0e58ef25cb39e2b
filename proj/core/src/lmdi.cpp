#include "divisia/lmdi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "divisia/errors.hpp"

namespace divisia {
namespace {

double weight(double a, double b, LogMeanVariant variant)
{
    if (a == b) return variant == LogMeanVariant::analytic_limit ? a : 0.0;
    return log_mean(a, b);
}

std::string format_value(double v)
{
    std::ostringstream out;
    out << v;
    return out.str();
}

// Per-factor endpoint values: either one common value or one value per
// member of the factor's group.
struct FactorEndpoint {
    double common = 1.0;
    std::vector<double> member_values;  // aligned with the group's member order
};

// Maximum of a grouped factor's member value over the panel years, used by
// the delta-substitute zero policy.
double member_series_max(const FactorSpec& factor, const PanelDataset& panel,
                         const std::string& member)
{
    double best = 0.0;
    for (int year = panel.first_year; year <= panel.last_year; ++year) {
        double value = 1.0;
        for (const auto& term : factor.terms) {
            double base;
            if (term.member) {
                base = panel.groups.at(factor.group).member_series(term.symbol, member).at(year);
            } else {
                base = panel.value(term.symbol, year);
            }
            double powed = 1.0;
            for (int k = 0; k < std::abs(term.exponent); ++k) powed *= base;
            value *= term.exponent < 0 ? 1.0 / powed : powed;
        }
        best = std::max(best, value);
    }
    return best;
}

double apply_zero_policy(double value, const FactorSpec& factor, const PanelDataset& panel,
                         const std::string& member, int year, ZeroPolicy policy)
{
    if (value > 0.0) return value;
    if (value < 0.0) {
        throw NumericError("negative member value for factor '" + factor.name + "', member '" +
                           member + "', year " + std::to_string(year));
    }
    if (policy == ZeroPolicy::reject) {
        throw NumericError("zero member value for factor '" + factor.name + "', member '" +
                           member + "', year " + std::to_string(year) +
                           " (zero policy: reject)");
    }
    const double ceiling = member_series_max(factor, panel, member);
    if (ceiling <= 0.0) {
        throw NumericError("member '" + member + "' of factor '" + factor.name +
                           "' is zero across the whole panel");
    }
    return 1e-10 * ceiling;
}

void require_closure(const IdentitySpec& spec, const PanelDataset& panel, int year,
                     double tolerance)
{
    const double target = evaluate_target(spec, panel, year);
    const double product = evaluate_factors(spec, panel, year).product();
    const double residual = std::abs(product - target) / std::abs(target);
    if (!(residual <= tolerance)) {
        throw NumericError("identity closure fails in year " + std::to_string(year) +
                           ": relative residual " + format_value(residual) + " exceeds " +
                           format_value(tolerance));
    }
}

} // namespace

double log_mean(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0)) {
        throw NumericError("log_mean requires positive arguments, got " + format_value(a) +
                           ", " + format_value(b));
    }
    if (a == b) return a;
    // log1p keeps the denominator accurate when the arguments are close;
    // a plain log of the ratio is the accurate form when they are far apart
    const double x = (a - b) / b;
    const double denominator = std::abs(x) < 0.5 ? std::log1p(x) : std::log(a / b);
    return (a - b) / denominator;
}

double EffectTable::effect(std::string_view factor_name) const
{
    for (std::size_t i = 0; i < factor_names.size(); ++i) {
        if (factor_names[i] == factor_name) return effects[i];
    }
    throw InputError("no factor named '" + std::string(factor_name) + "' in effect table");
}

double EffectTable::sum_effects() const
{
    double sum = 0.0;
    for (double e : effects) sum += e;
    return sum;
}

std::size_t EffectTable::sector_count() const
{
    std::size_t n = axes.empty() ? 0 : 1;
    for (const auto& axis : axes) n *= axis.members.size();
    return n;
}

std::vector<std::string> EffectTable::sector_members(std::size_t s) const
{
    std::vector<std::string> out(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        const auto size = axes[a].members.size();
        out[a] = axes[a].members[s % size];
        s /= size;
    }
    return out;
}

EffectTable decompose_interval(const IdentitySpec& spec, const PanelDataset& panel,
                               Interval interval, DecomposeMode mode,
                               const DecomposeOptions& options)
{
    if (interval.t1 <= interval.t0) {
        throw InputError("interval end year must exceed start year");
    }
    if (interval.t0 < panel.first_year || interval.t1 > panel.last_year) {
        throw InputError("interval [" + std::to_string(interval.t0) + ", " +
                         std::to_string(interval.t1) + "] outside panel range");
    }
    require_closure(spec, panel, interval.t0, options.closure_tolerance);
    require_closure(spec, panel, interval.t1, options.closure_tolerance);

    const double scale = conversion_factor(spec.target.unit, spec.target.report_unit);
    const double target0 = scale * evaluate_target(spec, panel, interval.t0);
    const double target1 = scale * evaluate_target(spec, panel, interval.t1);

    EffectTable table;
    table.interval = interval;
    table.mode = mode;
    table.delta_total = target1 - target0;
    for (const auto& factor : spec.factors) table.factor_names.push_back(factor.name);

    const auto evaluated0 = evaluate_factors(spec, panel, interval.t0);
    const auto evaluated1 = evaluate_factors(spec, panel, interval.t1);

    if (mode == DecomposeMode::aggregate) {
        const double L = weight(target1, target0, options.log_mean_variant);
        for (std::size_t i = 0; i < spec.factors.size(); ++i) {
            const double x0 = evaluated0.values[i].value;
            const double x1 = evaluated1.values[i].value;
            if (!(x0 > 0.0) || !(x1 > 0.0)) {
                throw NumericError("factor '" + spec.factors[i].name +
                                   "' is not strictly positive on the interval");
            }
            table.effects.push_back(L * std::log(x1 / x0));
        }
        return table;
    }

    // sectoral mode: sectors are the cross product of the grouped factors'
    // members (a single pseudo-sector when the identity has no groups)
    std::vector<std::size_t> grouped_index;
    for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        if (spec.factors[i].grouped()) {
            grouped_index.push_back(i);
            auto it = panel.groups.find(spec.factors[i].group);
            if (it == panel.groups.end()) {
                throw InputError("panel lacks group dimension '" + spec.factors[i].group + "'");
            }
            table.axes.push_back({it->second.dim, it->second.members});
        }
    }
    if (grouped_index.size() > 2) {
        throw InputError("at most two grouped factors are supported");
    }

    const std::size_t sectors = table.sector_count() == 0 ? 1 : table.sector_count();
    const bool no_axes = table.axes.empty();

    // per-factor endpoint values with the zero policy applied to members
    auto endpoint = [&](const EvaluatedFactors& evaluated, int year) {
        std::vector<FactorEndpoint> out(spec.factors.size());
        for (std::size_t i = 0; i < spec.factors.size(); ++i) {
            const auto& fv = evaluated.values[i];
            if (!spec.factors[i].grouped()) {
                if (!(fv.value > 0.0)) {
                    throw NumericError("factor '" + spec.factors[i].name +
                                       "' is not strictly positive in year " +
                                       std::to_string(year));
                }
                out[i].common = fv.value;
            } else {
                if (fv.members.empty()) {
                    throw InputError("grouped factor '" + spec.factors[i].name +
                                     "' has no members");
                }
                out[i].member_values.reserve(fv.members.size());
                for (const auto& [member, value] : fv.members) {
                    out[i].member_values.push_back(apply_zero_policy(
                        value, spec.factors[i], panel, member, year, options.zero_policy));
                }
            }
        }
        return out;
    };
    const auto values0 = endpoint(evaluated0, interval.t0);
    const auto values1 = endpoint(evaluated1, interval.t1);

    table.sector_effects.assign(spec.factors.size(), {});
    for (auto& row : table.sector_effects) row.reserve(sectors);

    std::vector<std::size_t> member_of_axis(table.axes.size(), 0);
    for (std::size_t s = 0; s < sectors; ++s) {
        // decode sector index into one member per axis (axis 0 slowest)
        if (!no_axes) {
            std::size_t rest = s;
            for (std::size_t a = table.axes.size(); a-- > 0;) {
                member_of_axis[a] = rest % table.axes[a].members.size();
                rest /= table.axes[a].members.size();
            }
        }

        auto sector_value = [&](const std::vector<FactorEndpoint>& values, std::size_t i) {
            const auto& factor = values[i];
            if (factor.member_values.empty()) return factor.common;
            std::size_t axis = 0;
            for (std::size_t g = 0; g < grouped_index.size(); ++g) {
                if (grouped_index[g] == i) axis = g;
            }
            return factor.member_values[member_of_axis[axis]];
        };

        double c0 = scale, c1 = scale;
        for (std::size_t i = 0; i < spec.factors.size(); ++i) {
            c0 *= sector_value(values0, i);
            c1 *= sector_value(values1, i);
        }
        const double L = weight(c1, c0, options.log_mean_variant);
        for (std::size_t i = 0; i < spec.factors.size(); ++i) {
            const double x0 = sector_value(values0, i);
            const double x1 = sector_value(values1, i);
            table.sector_effects[i].push_back(L * std::log(x1 / x0));
        }
    }

    // the reported factor effect is exactly the sum of its sector terms
    for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        double sum = 0.0;
        for (double v : table.sector_effects[i]) sum += v;
        table.effects.push_back(sum);
    }
    if (no_axes) {
        table.sector_effects.clear();
    }
    return table;
}

double ChainedResult::delta_total() const
{
    double sum = 0.0;
    for (const auto& step : steps) sum += step.delta_total;
    return sum;
}

ChainedResult chain_decompose(const IdentitySpec& spec, const PanelDataset& panel,
                              Interval span, DecomposeMode mode,
                              const DecomposeOptions& options)
{
    if (span.t1 <= span.t0) throw InputError("span end year must exceed start year");
    ChainedResult result;
    result.span = span;
    for (int year = span.t0; year < span.t1; ++year) {
        result.steps.push_back(
            decompose_interval(spec, panel, {year, year + 1}, mode, options));
    }
    return result;
}

std::vector<std::pair<std::string, double>> attribute_group(
    double parent_effect,
    const std::vector<std::pair<std::string, double>>& members_t0,
    const std::vector<std::pair<std::string, double>>& members_t1)
{
    if (members_t0.empty() || members_t0.size() != members_t1.size()) {
        throw InputError("attribute_group requires matching, non-empty member lists");
    }
    std::vector<double> weights;
    weights.reserve(members_t0.size());
    double total = 0.0;
    for (std::size_t i = 0; i < members_t0.size(); ++i) {
        if (members_t0[i].first != members_t1[i].first) {
            throw InputError("attribute_group member lists disagree at '" +
                             members_t0[i].first + "' vs '" + members_t1[i].first + "'");
        }
        const double w = log_mean(members_t1[i].second, members_t0[i].second);
        weights.push_back(w);
        total += w;
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.emplace_back(members_t0[i].first, parent_effect * weights[i] / total);
    }
    return out;
}

} // namespace divisia
