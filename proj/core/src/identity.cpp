#include "divisia/identity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "divisia/errors.hpp"

namespace divisia {
namespace {

using nlohmann::json;

double pow_int(double base, int exponent)
{
    // exponents are small signed integers; repeated multiplication keeps
    // 1/x exactly reciprocal for exponent -1
    double result = 1.0;
    const int n = exponent < 0 ? -exponent : exponent;
    for (int k = 0; k < n; ++k) result *= base;
    return exponent < 0 ? 1.0 / result : result;
}

double term_value(const FactorTerm& term, const PanelDataset& panel, int year,
                  const std::string& group, const std::string& member)
{
    if (term.member) {
        auto it = panel.groups.find(group);
        if (it == panel.groups.end()) {
            throw InputError("panel lacks group dimension '" + group + "'");
        }
        return it->second.member_series(term.symbol, member).at(year);
    }
    return panel.value(term.symbol, year);
}

} // namespace

const FactorSpec* IdentitySpec::find(std::string_view factor_name) const
{
    for (const auto& f : factors) {
        if (f.name == factor_name) return &f;
    }
    return nullptr;
}

std::vector<const FactorSpec*> IdentitySpec::grouped_factors() const
{
    std::vector<const FactorSpec*> out;
    for (const auto& f : factors) {
        if (f.grouped()) out.push_back(&f);
    }
    return out;
}

IdentitySpec builtin_residential_identity()
{
    IdentitySpec spec;
    spec.name = "residential_intensity";
    spec.target.name = "c_h";
    spec.target.terms = {{"C", 1, false}, {"H", -1, false}};
    spec.target.unit = Unit::MtCO2PerMhousehold;
    spec.target.report_unit = Unit::kgCO2PerHousehold;
    spec.factors = {
        {"p", {{"P", 1, false}, {"H", -1, false}}, ""},
        {"S", {{"P", 1, true}, {"P", -1, false}}, "age"},
        {"r", {{"F", 1, false}, {"Pr", 1, false}, {"I", -1, false}}, ""},
        {"i", {{"I", 1, false}, {"P", -1, false}}, ""},
        {"d", {{"Pr", -1, false}}, ""},
        {"e", {{"E", 1, false}, {"F", -1, false}}, ""},
        {"K", {{"C", 1, true}, {"E", -1, false}}, "carrier"},
    };
    return spec;
}

const FactorValue& EvaluatedFactors::at(std::string_view name) const
{
    for (const auto& v : values) {
        if (v.name == name) return v;
    }
    throw InputError("no factor named '" + std::string(name) + "'");
}

double EvaluatedFactors::product() const
{
    double p = 1.0;
    for (const auto& v : values) p *= v.value;
    return p;
}

double evaluate_target(const IdentitySpec& spec, const PanelDataset& panel, int year)
{
    double value = 1.0;
    for (const auto& term : spec.target.terms) {
        value *= pow_int(panel.value(term.symbol, year), term.exponent);
    }
    return value;
}

EvaluatedFactors evaluate_factors(const IdentitySpec& spec, const PanelDataset& panel, int year)
{
    EvaluatedFactors out;
    out.values.reserve(spec.factors.size());
    for (const auto& factor : spec.factors) {
        FactorValue fv;
        fv.name = factor.name;
        if (!factor.grouped()) {
            double value = 1.0;
            for (const auto& term : factor.terms) {
                value *= pow_int(term_value(term, panel, year, "", ""), term.exponent);
            }
            fv.value = value;
        } else {
            auto group_it = panel.groups.find(factor.group);
            if (group_it == panel.groups.end()) {
                throw InputError("panel lacks group dimension '" + factor.group +
                                 "' required by factor '" + factor.name + "'");
            }
            double sum = 0.0;
            for (const auto& member : group_it->second.members) {
                double value = 1.0;
                for (const auto& term : factor.terms) {
                    value *= pow_int(term_value(term, panel, year, factor.group, member),
                                     term.exponent);
                }
                fv.members.emplace_back(member, value);
                sum += value;
            }
            fv.value = sum;
        }
        out.values.push_back(std::move(fv));
    }
    return out;
}

ClosureReport check_closure(const IdentitySpec& spec, const PanelDataset& panel,
                            double tolerance)
{
    ClosureReport report;
    report.tolerance = tolerance;
    for (int year = panel.first_year; year <= panel.last_year; ++year) {
        const double target = evaluate_target(spec, panel, year);
        const double product = evaluate_factors(spec, panel, year).product();
        const double residual = std::abs(product - target) / std::abs(target);
        report.residuals.emplace_back(year, residual);
        report.max_residual = std::max(report.max_residual, residual);
    }
    report.passed = report.max_residual <= tolerance;
    return report;
}

IdentitySpec load_identity(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open identity file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InputError("identity parse error in " + path.string() + ": " + e.what());
    }

    auto parse_terms = [](const json& arr) {
        std::vector<FactorTerm> terms;
        for (const auto& t : arr) {
            FactorTerm term;
            term.symbol = t.at("symbol").get<std::string>();
            term.exponent = t.at("exponent").get<int>();
            term.member = t.value("member", false);
            if (term.exponent == 0) throw InputError("zero exponent in identity term");
            if (term.exponent < -12 || term.exponent > 12) {
                throw InputError("identity term exponent out of range [-12, 12]");
            }
            terms.push_back(std::move(term));
        }
        if (terms.empty()) throw InputError("identity factor with no terms");
        return terms;
    };

    IdentitySpec spec;
    try {
        spec.name = doc.value("name", "identity");
        const auto& target = doc.at("target");
        spec.target.name = target.value("name", "target");
        spec.target.terms = parse_terms(target.at("terms"));
        const auto parse_unit_field = [&](const char* key) {
            const auto text = target.value(key, "dimensionless");
            auto unit = parse_unit(text);
            if (!unit) throw InputError("unknown unit '" + text + "' in identity target");
            return *unit;
        };
        spec.target.unit = parse_unit_field("unit");
        spec.target.report_unit = parse_unit_field("report_unit");
        int grouped = 0;
        for (const auto& f : doc.at("factors")) {
            FactorSpec factor;
            factor.name = f.at("name").get<std::string>();
            factor.group = f.value("group", "");
            factor.terms = parse_terms(f.at("terms"));
            if (factor.grouped()) ++grouped;
            const bool has_member_term =
                std::any_of(factor.terms.begin(), factor.terms.end(),
                            [](const FactorTerm& t) { return t.member; });
            if (factor.grouped() != has_member_term) {
                throw InputError("factor '" + factor.name +
                                 "': member terms and group must be set together");
            }
            spec.factors.push_back(std::move(factor));
        }
        if (grouped > 2) throw InputError("at most two grouped factors are supported");
        if (spec.factors.empty()) throw InputError("identity has no factors");
    } catch (const json::exception& e) {
        throw InputError("identity file " + path.string() + ": " + e.what());
    }
    return spec;
}

void save_identity(const IdentitySpec& spec, const std::filesystem::path& path)
{
    auto dump_terms = [](const std::vector<FactorTerm>& terms) {
        json arr = json::array();
        for (const auto& t : terms) {
            json term{{"symbol", t.symbol}, {"exponent", t.exponent}};
            if (t.member) term["member"] = true;
            arr.push_back(std::move(term));
        }
        return arr;
    };

    json doc;
    doc["name"] = spec.name;
    doc["target"] = {{"name", spec.target.name},
                     {"terms", dump_terms(spec.target.terms)},
                     {"unit", std::string(unit_name(spec.target.unit))},
                     {"report_unit", std::string(unit_name(spec.target.report_unit))}};
    doc["factors"] = json::array();
    for (const auto& f : spec.factors) {
        json factor{{"name", f.name}, {"terms", dump_terms(f.terms)}};
        if (f.grouped()) factor["group"] = f.group;
        doc["factors"].push_back(std::move(factor));
    }

    std::ofstream out(path);
    if (!out) throw IoError("cannot write identity file: " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("error while writing identity file: " + path.string());
}

} // namespace divisia
