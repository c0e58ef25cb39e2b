#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "divisia/errors.hpp"
#include "divisia/identity.hpp"
#include "support/test_support.hpp"

using namespace divisia;
using testsupport::fixture_panel;
using testsupport::rel_close;

TEST_CASE("builtin identity has the seven factors in order")
{
    const auto spec = builtin_residential_identity();
    REQUIRE(spec.factors.size() == 7);
    const std::vector<std::string> expected{"p", "S", "r", "i", "d", "e", "K"};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(spec.factors[i].name == expected[i]);
    }
    CHECK(spec.find("S")->group == "age");
    CHECK(spec.find("K")->group == "carrier");
    CHECK(spec.grouped_factors().size() == 2);
    CHECK(spec.target.unit == Unit::MtCO2PerMhousehold);
    CHECK(spec.target.report_unit == Unit::kgCO2PerHousehold);
}

TEST_CASE("factor evaluation on the fixture")
{
    const auto spec = builtin_residential_identity();
    const auto panel = load_panel(fixture_panel()).panel;
    const auto factors = evaluate_factors(spec, panel, 2000);

    CHECK(factors.at("p").value == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(factors.at("K").value == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(factors.at("S").value == 1.0);  // shares sum to one
    CHECK(factors.at("r").value == doctest::Approx(2.0).epsilon(1e-12));

    const auto& members = factors.at("K").members;
    REQUIRE(members.size() == 5);
    double sum = 0.0;
    for (const auto& [member, value] : members) sum += value;
    CHECK(rel_close(sum, factors.at("K").value, 1e-12));
}

TEST_CASE("grouped members sum to the factor value every year")
{
    const auto spec = builtin_residential_identity();
    const auto panel = load_panel(fixture_panel()).panel;
    for (int year = panel.first_year; year <= panel.last_year; ++year) {
        const auto factors = evaluate_factors(spec, panel, year);
        for (const auto& fv : factors.values) {
            if (fv.members.empty()) continue;
            double sum = 0.0;
            for (const auto& [member, value] : fv.members) sum += value;
            CHECK(rel_close(sum, fv.value, 1e-12));
        }
    }
}

TEST_CASE("closure holds on the fixture")
{
    const auto spec = builtin_residential_identity();
    const auto panel = load_panel(fixture_panel()).panel;
    const auto report = check_closure(spec, panel);
    CHECK(report.passed);
    CHECK(report.max_residual <= 1e-12);
    CHECK(report.residuals.size() == 6);
}

TEST_CASE("closure fails when a factor references a stale series")
{
    auto panel = load_panel(fixture_panel()).panel;
    // E inflated 1% while the custom identity's e still divides the old series
    auto stale = panel.at("E");
    stale.symbol = "E_stale";
    panel.series["E_stale"] = stale;
    for (auto& v : panel.series.at("E").values) v *= 1.01;
    for (auto& [member, series] : panel.groups.at("carrier").series.at("E")) {
        for (auto& v : series.values) v *= 1.01;
    }

    auto spec = builtin_residential_identity();
    for (auto& factor : spec.factors) {
        if (factor.name == "e") factor.terms = {{"E_stale", 1, false}, {"F", -1, false}};
    }
    const auto report = check_closure(spec, panel);
    CHECK_FALSE(report.passed);
    CHECK(report.max_residual == doctest::Approx(0.01).epsilon(0.01));

    CHECK(check_closure(spec, panel, 1.0).passed);  // degenerate tolerance
}

TEST_CASE("permuting factors changes no value and no residual")
{
    const auto spec = builtin_residential_identity();
    auto reversed = spec;
    std::reverse(reversed.factors.begin(), reversed.factors.end());
    const auto panel = load_panel(fixture_panel()).panel;

    for (int year : {2000, 2003, 2005}) {
        const auto a = evaluate_factors(spec, panel, year);
        const auto b = evaluate_factors(reversed, panel, year);
        for (const auto& fv : a.values) {
            CHECK(fv.value == b.at(fv.name).value);  // bit identical
        }
    }
    const auto ra = check_closure(spec, panel);
    const auto rb = check_closure(reversed, panel);
    CHECK(std::abs(ra.max_residual - rb.max_residual) <= 1e-14);
}

TEST_CASE("degenerate groups: single member reduces S to one and K to C/E")
{
    auto panel = testsupport::empty_panel(2000, 2000);
    testsupport::add_series(panel, "C", {400}, Unit::MtCO2);
    testsupport::add_series(panel, "E", {500}, Unit::Mtce);
    testsupport::add_series(panel, "H", {40}, Unit::Mhousehold);
    testsupport::add_series(panel, "P", {100}, Unit::Mperson);
    testsupport::add_series(panel, "F", {1000}, Unit::Mm2);
    testsupport::add_series(panel, "I", {5000}, Unit::Currency);
    testsupport::add_series(panel, "Pr", {10}, Unit::CurrencyPerM2);
    testsupport::add_member(panel, "age", "P", "all", {100}, Unit::Mperson);
    testsupport::add_member(panel, "carrier", "C", "all", {400}, Unit::MtCO2);

    const auto spec = builtin_residential_identity();
    const auto factors = evaluate_factors(spec, panel, 2000);
    CHECK(factors.at("S").value == 1.0);
    CHECK(factors.at("K").value == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(check_closure(spec, panel).passed);
}

TEST_CASE("missing symbol is reported")
{
    const auto spec = builtin_residential_identity();
    auto panel = load_panel(fixture_panel()).panel;
    panel.series.erase("I");
    CHECK_THROWS_AS(evaluate_factors(spec, panel, 2000), InputError);
}

TEST_CASE("identity config round trip")
{
    const auto spec = builtin_residential_identity();
    const auto path = std::filesystem::temp_directory_path() / "identity_roundtrip.json";
    save_identity(spec, path);
    const auto reloaded = load_identity(path);

    CHECK(reloaded.name == spec.name);
    CHECK(reloaded.target.name == spec.target.name);
    CHECK(reloaded.target.unit == spec.target.unit);
    CHECK(reloaded.target.report_unit == spec.target.report_unit);
    REQUIRE(reloaded.factors.size() == spec.factors.size());
    for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        CHECK(reloaded.factors[i].name == spec.factors[i].name);
        CHECK(reloaded.factors[i].group == spec.factors[i].group);
        REQUIRE(reloaded.factors[i].terms.size() == spec.factors[i].terms.size());
        for (std::size_t t = 0; t < spec.factors[i].terms.size(); ++t) {
            CHECK(reloaded.factors[i].terms[t].symbol == spec.factors[i].terms[t].symbol);
            CHECK(reloaded.factors[i].terms[t].exponent == spec.factors[i].terms[t].exponent);
            CHECK(reloaded.factors[i].terms[t].member == spec.factors[i].terms[t].member);
        }
    }

    const auto panel = load_panel(fixture_panel()).panel;
    CHECK(check_closure(reloaded, panel).passed);
}

TEST_CASE("identity config rejects malformed input")
{
    namespace ts = testsupport;
    CHECK_THROWS_AS(load_identity("/no/such/identity.json"), IoError);
    CHECK_THROWS_AS(load_identity(ts::write_temp_file("id_bad.json", "{ not json")), InputError);
    CHECK_THROWS_AS(
        load_identity(ts::write_temp_file(
            "id_zero_exp.json",
            R"({"target":{"terms":[{"symbol":"T","exponent":1}]},
                "factors":[{"name":"x","terms":[{"symbol":"x","exponent":0}]}]})")),
        InputError);
    CHECK_THROWS_AS(
        load_identity(ts::write_temp_file(
            "id_three_groups.json",
            R"({"target":{"terms":[{"symbol":"T","exponent":1}]},
                "factors":[
                  {"name":"a","group":"g1","terms":[{"symbol":"a","exponent":1,"member":true}]},
                  {"name":"b","group":"g2","terms":[{"symbol":"b","exponent":1,"member":true}]},
                  {"name":"c","group":"g3","terms":[{"symbol":"c","exponent":1,"member":true}]}
                ]})")),
        InputError);
}
