#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "divisia/identity.hpp"
#include "divisia/lmdi.hpp"
#include "divisia/mitigation.hpp"
#include "divisia/panel.hpp"

namespace {

// synthetic residential panel with smooth drift, n years from 2000
divisia::PanelDataset synthetic_panel(int n_years)
{
    divisia::PanelDataset panel;
    panel.first_year = 2000;
    panel.last_year = 2000 + n_years - 1;

    auto series = [&](const char* symbol, divisia::Unit unit, double base, double growth) {
        divisia::QuantitySeries s;
        s.symbol = symbol;
        s.unit = unit;
        s.first_year = panel.first_year;
        for (int k = 0; k < n_years; ++k) s.values.push_back(base * std::pow(growth, k));
        panel.series[symbol] = std::move(s);
    };

    series("H", divisia::Unit::Mhousehold, 40.0, 1.012);
    series("P", divisia::Unit::Mperson, 100.0, 1.008);
    series("F", divisia::Unit::Mm2, 1000.0, 1.05);
    series("I", divisia::Unit::Currency, 5000.0, 1.09);
    series("Pr", divisia::Unit::CurrencyPerM2, 10.0, 1.06);

    const char* carriers[] = {"coal", "oil", "gas", "elec", "heat"};
    const double e_base[] = {220, 60, 40, 120, 60};
    const double e_growth[] = {0.99, 1.03, 1.05, 1.06, 1.03};
    const double k_base[] = {1.1, 0.9, 0.75, 0.4, 0.42};
    const double k_growth[] = {0.995, 0.998, 0.999, 0.997, 0.998};

    auto& group = panel.groups["carrier"];
    group.dim = "carrier";
    divisia::QuantitySeries e_total, c_total;
    e_total = {"E", divisia::Unit::Mtce, panel.first_year, std::vector<double>(n_years, 0.0)};
    c_total = {"C", divisia::Unit::MtCO2, panel.first_year, std::vector<double>(n_years, 0.0)};
    for (int c = 0; c < 5; ++c) {
        group.members.push_back(carriers[c]);
        divisia::QuantitySeries e{"E", divisia::Unit::Mtce, panel.first_year, {}};
        divisia::QuantitySeries k{"C", divisia::Unit::MtCO2, panel.first_year, {}};
        for (int t = 0; t < n_years; ++t) {
            const double energy = e_base[c] * std::pow(e_growth[c], t);
            const double carbon = energy * k_base[c] * std::pow(k_growth[c], t);
            e.values.push_back(energy);
            k.values.push_back(carbon);
            e_total.values[t] += energy;
            c_total.values[t] += carbon;
        }
        group.series["E"][carriers[c]] = std::move(e);
        group.series["C"][carriers[c]] = std::move(k);
    }
    panel.series["E"] = std::move(e_total);
    panel.series["C"] = std::move(c_total);

    auto& age = panel.groups["age"];
    age.dim = "age";
    const char* bands[] = {"0-14", "15-64", "65+"};
    const double share[] = {0.25, 0.65, 0.10};
    for (int a = 0; a < 3; ++a) {
        age.members.push_back(bands[a]);
        divisia::QuantitySeries s{"P", divisia::Unit::Mperson, panel.first_year, {}};
        for (int t = 0; t < n_years; ++t) {
            s.values.push_back(share[a] * panel.series["P"].values[t]);
        }
        age.series["P"][bands[a]] = std::move(s);
    }
    return panel;
}

void BM_log_mean(benchmark::State& state)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.1, 10.0);
    double a = dist(rng), b = dist(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(divisia::log_mean(a, b));
        a += 1e-9;
    }
}
BENCHMARK(BM_log_mean);

void BM_decompose_interval_sectoral(benchmark::State& state)
{
    const auto panel = synthetic_panel(2);
    const auto identity = divisia::builtin_residential_identity();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            divisia::decompose_interval(identity, panel, {2000, 2001}));
    }
}
BENCHMARK(BM_decompose_interval_sectoral);

void BM_chain_decompose(benchmark::State& state)
{
    const int years = static_cast<int>(state.range(0));
    const auto panel = synthetic_panel(years);
    const auto identity = divisia::builtin_residential_identity();
    for (auto _ : state) {
        benchmark::DoNotOptimize(divisia::chain_decompose(
            identity, panel, {panel.first_year, panel.last_year}));
    }
    state.SetItemsProcessed(state.iterations() * (years - 1));
}
BENCHMARK(BM_chain_decompose)->Arg(17)->Arg(50);

void BM_assess_pipeline(benchmark::State& state)
{
    const auto panel = synthetic_panel(17);
    const auto identity = divisia::builtin_residential_identity();
    for (auto _ : state) {
        const auto chained = divisia::chain_decompose(
            identity, panel, {panel.first_year, panel.last_year});
        benchmark::DoNotOptimize(divisia::assess_series(chained, panel));
    }
}
BENCHMARK(BM_assess_pipeline);

} // namespace

BENCHMARK_MAIN();
