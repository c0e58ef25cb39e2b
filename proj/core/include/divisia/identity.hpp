#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "divisia/panel.hpp"
#include "divisia/units.hpp"

namespace divisia {

/// One term of a signed-exponent product. `member` marks the symbol whose
/// per-member breakdown series is substituted when the factor is grouped.
struct FactorTerm {
    std::string symbol;
    int exponent = 1;
    bool member = false;
};

struct FactorSpec {
    std::string name;
    std::vector<FactorTerm> terms;
    std::string group;  // empty, or a group dimension ("age", "carrier")

    bool grouped() const { return !group.empty(); }
};

struct TargetSpec {
    std::string name = "c_h";
    std::vector<FactorTerm> terms;
    Unit unit = Unit::Dimensionless;         // unit of the raw term product
    Unit report_unit = Unit::Dimensionless;  // unit effects are reported in
};

/// An ordered multiplicative factorization of a target quantity. Closure
/// (product of factors == target, year by year) is checked, not assumed.
struct IdentitySpec {
    std::string name;
    TargetSpec target;
    std::vector<FactorSpec> factors;

    const FactorSpec* find(std::string_view factor_name) const;
    std::vector<const FactorSpec*> grouped_factors() const;
};

/// The seven-factor residential identity
///   c_h = p * S * r * i * d * e * K
/// with S summed over age shares and K over carrier emission factors.
IdentitySpec builtin_residential_identity();

struct FactorValue {
    std::string name;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> members;  // grouped factors only
};

struct EvaluatedFactors {
    std::vector<FactorValue> values;  // identity order

    const FactorValue& at(std::string_view name) const;
    double product() const;
};

/// Raw target value (product of target terms) at one year.
double evaluate_target(const IdentitySpec& spec, const PanelDataset& panel, int year);

/// Every factor value at one year; grouped factors carry member values whose
/// sum is the factor value. Throws InputError if a symbol is absent.
EvaluatedFactors evaluate_factors(const IdentitySpec& spec, const PanelDataset& panel, int year);

struct ClosureReport {
    double tolerance = 1e-9;
    std::vector<std::pair<int, double>> residuals;  // year -> relative residual
    double max_residual = 0.0;
    bool passed = false;
};

ClosureReport check_closure(const IdentitySpec& spec, const PanelDataset& panel,
                            double tolerance = 1e-9);

IdentitySpec load_identity(const std::filesystem::path& path);
void save_identity(const IdentitySpec& spec, const std::filesystem::path& path);

} // namespace divisia
