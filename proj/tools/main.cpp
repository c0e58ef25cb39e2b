// divisia: batch front end for panel validation, index decomposition and
// mitigation assessment. Subcommands: validate, decompose, assess,
// emit-identity. Exit codes: 0 ok, 1 input/validation, 2 numeric/closure,
// 3 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "divisia/errors.hpp"
#include "divisia/identity.hpp"
#include "divisia/lmdi.hpp"
#include "divisia/mitigation.hpp"
#include "divisia/panel.hpp"
#include "divisia/report.hpp"
#include "divisia/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct RunConfig {
    std::string input;
    std::string schema;
    std::string identity;
    std::string out;
    std::string span;
    std::string mode = "sectoral";
    std::string sign_scope = "factor";
    std::string household_convention = "end";
    std::string zero_policy = "delta";
    std::string log_mean_variant = "limit";
    std::string periods;
    std::string targets;
    std::string band_kind = "absolute";
    std::string format = "csv";
    std::string delimiter = ",";
    double closure_tol = 1e-9;
    double group_tol = 1e-6;
    double coal_factor = 0.0;  // 0 means "use the panel's C/E"
    double band_intensity = -1.0;
    double band_total = -1.0;
    int precision = 6;
    bool renormalize = false;
};

divisia::DecomposeMode parse_mode(const std::string& s)
{
    if (s == "sectoral") return divisia::DecomposeMode::sectoral;
    if (s == "aggregate") return divisia::DecomposeMode::aggregate;
    throw divisia::InputError("unknown mode '" + s + "'");
}

divisia::SignScope parse_sign_scope(const std::string& s)
{
    if (s == "factor") return divisia::SignScope::factor;
    if (s == "sector") return divisia::SignScope::sector;
    throw divisia::InputError("unknown sign scope '" + s + "'");
}

divisia::HouseholdConvention parse_convention(const std::string& s)
{
    if (s == "end") return divisia::HouseholdConvention::end;
    if (s == "start") return divisia::HouseholdConvention::start;
    if (s == "logmean") return divisia::HouseholdConvention::logmean;
    throw divisia::InputError("unknown household convention '" + s + "'");
}

divisia::DecomposeOptions decompose_options(const RunConfig& cfg)
{
    divisia::DecomposeOptions options;
    options.closure_tolerance = cfg.closure_tol;
    if (cfg.zero_policy == "delta") {
        options.zero_policy = divisia::ZeroPolicy::delta_substitute;
    } else if (cfg.zero_policy == "reject") {
        options.zero_policy = divisia::ZeroPolicy::reject;
    } else {
        throw divisia::InputError("unknown zero policy '" + cfg.zero_policy + "'");
    }
    if (cfg.log_mean_variant == "limit") {
        options.log_mean_variant = divisia::LogMeanVariant::analytic_limit;
    } else if (cfg.log_mean_variant == "zero") {
        options.log_mean_variant = divisia::LogMeanVariant::zero_at_equal;
    } else {
        throw divisia::InputError("unknown log-mean variant '" + cfg.log_mean_variant + "'");
    }
    return options;
}

divisia::PanelSchema schema_for(const RunConfig& cfg)
{
    if (cfg.schema.empty()) return divisia::PanelSchema::builtin();
    return divisia::load_schema(cfg.schema);
}

divisia::IdentitySpec identity_for(const RunConfig& cfg)
{
    if (cfg.identity.empty()) return divisia::builtin_residential_identity();
    return divisia::load_identity(cfg.identity);
}

divisia::LoadOptions load_options(const RunConfig& cfg)
{
    if (cfg.delimiter.size() != 1) {
        throw divisia::InputError("delimiter must be a single character");
    }
    return {cfg.delimiter[0], cfg.renormalize};
}

divisia::Interval parse_span(const RunConfig& cfg, const divisia::PanelDataset& panel)
{
    if (cfg.span.empty()) return {panel.first_year, panel.last_year};
    const auto colon = cfg.span.find(':');
    if (colon == std::string::npos) {
        throw divisia::InputError("span must be written first:last, got '" + cfg.span + "'");
    }
    try {
        return {std::stoi(cfg.span.substr(0, colon)), std::stoi(cfg.span.substr(colon + 1))};
    } catch (const std::exception&) {
        throw divisia::InputError("span must be written first:last, got '" + cfg.span + "'");
    }
}

std::optional<divisia::UncertaintyBand> band_for(const RunConfig& cfg)
{
    if (cfg.band_intensity < 0.0 && cfg.band_total < 0.0) return std::nullopt;
    divisia::UncertaintyBand band;
    band.intensity_half_width = std::max(cfg.band_intensity, 0.0);
    band.total_half_width = std::max(cfg.band_total, 0.0);
    if (cfg.band_kind == "absolute") {
        band.kind = divisia::BandKind::absolute;
    } else if (cfg.band_kind == "relative") {
        band.kind = divisia::BandKind::relative;
    } else {
        throw divisia::InputError("unknown band kind '" + cfg.band_kind + "'");
    }
    return band;
}

void ensure_out_dir(const RunConfig& cfg)
{
    if (cfg.out.empty()) throw divisia::InputError("--out directory is required");
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec || !fs::is_directory(cfg.out)) {
        throw divisia::IoError("cannot create output directory: " + cfg.out);
    }
}

void emit_table(const divisia::Table& table, const RunConfig& cfg)
{
    const fs::path base = fs::path(cfg.out) / table.name;
    if (cfg.format == "csv" || cfg.format == "both") {
        divisia::write_csv(table, fs::path(base).replace_extension(".csv"), cfg.precision);
    }
    if (cfg.format == "json" || cfg.format == "both") {
        divisia::write_json(table, fs::path(base).replace_extension(".json"));
    }
    if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both") {
        throw divisia::InputError("unknown output format '" + cfg.format + "'");
    }
}

json config_json(const RunConfig& cfg, const std::string& command)
{
    json j;
    j["command"] = command;
    j["input"] = cfg.input;
    j["schema"] = cfg.schema.empty() ? "builtin" : cfg.schema;
    j["identity"] = cfg.identity.empty() ? "builtin" : cfg.identity;
    j["out"] = cfg.out;
    j["span"] = cfg.span.empty() ? "full" : cfg.span;
    j["mode"] = cfg.mode;
    j["sign_scope"] = cfg.sign_scope;
    j["household_convention"] = cfg.household_convention;
    j["zero_policy"] = cfg.zero_policy;
    j["log_mean_variant"] = cfg.log_mean_variant;
    j["closure_tolerance"] = cfg.closure_tol;
    j["group_tolerance"] = cfg.group_tol;
    j["periods"] = cfg.periods;
    j["targets"] = cfg.targets;
    j["coal_factor"] = cfg.coal_factor > 0.0 ? json(cfg.coal_factor) : json("panel C/E");
    j["band_intensity"] = cfg.band_intensity;
    j["band_total"] = cfg.band_total;
    j["band_kind"] = cfg.band_kind;
    j["report_precision"] = cfg.precision;
    j["format"] = cfg.format;
    j["delimiter"] = cfg.delimiter;
    j["renormalize_groups"] = cfg.renormalize;
    return j;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const divisia::ClosureReport* closure, bool validation_passed)
{
    json manifest;
    manifest["tool"] = "divisia";
    manifest["version"] = std::string(divisia::version);
    manifest["config"] = config_json(cfg, command);
    manifest["validation_passed"] = validation_passed;
    if (closure) {
        manifest["closure"] = {{"max_residual", closure->max_residual},
                               {"tolerance", closure->tolerance},
                               {"passed", closure->passed}};
    }
    const fs::path path = fs::path(cfg.out) / "run_manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw divisia::IoError("cannot write " + path.string());
    out << manifest.dump(1) << '\n';
}

divisia::Table validation_table(const divisia::ValidationReport& report)
{
    divisia::Table table;
    table.name = "validation_report";
    table.columns = {"severity", "year", "symbol", "message"};
    for (const auto& f : report.findings) {
        const char* severity = f.severity == divisia::Severity::error     ? "error"
                               : f.severity == divisia::Severity::warning ? "warning"
                                                                          : "info";
        divisia::Table::Cell year = std::monostate{};
        if (f.year) year = static_cast<std::int64_t>(*f.year);
        table.add_row({std::string(severity), year, f.symbol, f.message});
    }
    return table;
}

struct LoadedRun {
    divisia::PanelDataset panel;
    divisia::ValidationReport report;
};

LoadedRun load_and_validate(const RunConfig& cfg)
{
    const auto schema = schema_for(cfg);
    auto loaded = divisia::load_panel(cfg.input, schema, load_options(cfg));
    LoadedRun run{std::move(loaded.panel), {}};
    run.report.findings = std::move(loaded.warnings);
    auto validated = divisia::validate_panel(run.panel, cfg.group_tol);
    run.report.findings.insert(run.report.findings.end(), validated.findings.begin(),
                               validated.findings.end());
    return run;
}

int cmd_validate(const RunConfig& cfg)
{
    ensure_out_dir(cfg);
    auto run = load_and_validate(cfg);
    emit_table(validation_table(run.report), cfg);
    write_manifest(cfg, "validate", nullptr, run.report.passed());
    return run.report.passed() ? kExitOk : kExitInput;
}

// ordered annual (or single-block) effect output plus waterfall plot data
void write_effect_tables(const std::vector<divisia::EffectTable>& tables,
                         const divisia::PanelDataset& panel, const RunConfig& cfg)
{
    divisia::Table summary;
    summary.name = "interval_summary";
    summary.columns = {"t0", "t1", "target_t0", "target_t1", "delta"};

    divisia::Table effects;
    effects.name = "factor_effects";
    effects.columns = {"t0", "t1", "factor", "effect"};

    divisia::Table waterfall;
    waterfall.name = "waterfall";
    waterfall.columns = {"t0", "t1", "rank", "factor", "effect", "cumulative_before",
                         "cumulative_after"};

    const auto derived = divisia::derive_quantities(panel);
    for (const auto& t : tables) {
        const double target0 = derived.value("c_h", t.interval.t0);
        summary.add_row({static_cast<std::int64_t>(t.interval.t0),
                         static_cast<std::int64_t>(t.interval.t1), target0,
                         derived.value("c_h", t.interval.t1), t.delta_total});
        double cumulative = target0;
        for (std::size_t i = 0; i < t.factor_names.size(); ++i) {
            effects.add_row({static_cast<std::int64_t>(t.interval.t0),
                             static_cast<std::int64_t>(t.interval.t1), t.factor_names[i],
                             t.effects[i]});
            const double before = cumulative;
            cumulative += t.effects[i];
            waterfall.add_row({static_cast<std::int64_t>(t.interval.t0),
                               static_cast<std::int64_t>(t.interval.t1),
                               static_cast<std::int64_t>(i + 1), t.factor_names[i],
                               t.effects[i], before, cumulative});
        }
    }
    emit_table(summary, cfg);
    emit_table(effects, cfg);
    emit_table(waterfall, cfg);

    const bool sectoral = !tables.empty() && !tables.front().sector_effects.empty();
    if (!sectoral) return;
    divisia::Table sectors;
    sectors.name = "sector_effects";
    sectors.columns = {"t0", "t1", "factor"};
    for (const auto& axis : tables.front().axes) sectors.columns.push_back(axis.dim);
    sectors.columns.push_back("effect");
    for (const auto& t : tables) {
        for (std::size_t i = 0; i < t.factor_names.size(); ++i) {
            for (std::size_t s = 0; s < t.sector_count(); ++s) {
                std::vector<divisia::Table::Cell> row{
                    static_cast<std::int64_t>(t.interval.t0),
                    static_cast<std::int64_t>(t.interval.t1), t.factor_names[i]};
                for (const auto& member : t.sector_members(s)) row.emplace_back(member);
                row.emplace_back(t.sector_effects[i][s]);
                sectors.add_row(std::move(row));
            }
        }
    }
    emit_table(sectors, cfg);
}

divisia::Table closure_table(const divisia::ClosureReport& closure)
{
    divisia::Table table;
    table.name = "closure";
    table.columns = {"year", "relative_residual"};
    for (const auto& [year, residual] : closure.residuals) {
        table.add_row({static_cast<std::int64_t>(year), residual});
    }
    return table;
}

int cmd_decompose(const RunConfig& cfg)
{
    ensure_out_dir(cfg);
    auto run = load_and_validate(cfg);
    if (!run.report.passed()) {
        emit_table(validation_table(run.report), cfg);
        write_manifest(cfg, "decompose", nullptr, false);
        std::cerr << "error: panel validation failed\n";
        return kExitInput;
    }

    const auto identity = identity_for(cfg);
    const auto closure = divisia::check_closure(identity, run.panel, cfg.closure_tol);
    if (!closure.passed) {
        write_manifest(cfg, "decompose", &closure, true);
        std::cerr << "error: identity closure fails, max relative residual "
                  << closure.max_residual << " exceeds " << cfg.closure_tol << "\n";
        return kExitNumeric;
    }

    const auto span = parse_span(cfg, run.panel);
    const auto chained = divisia::chain_decompose(identity, run.panel, span, parse_mode(cfg.mode),
                                                  decompose_options(cfg));
    write_effect_tables(chained.steps, run.panel, cfg);
    emit_table(closure_table(closure), cfg);
    write_manifest(cfg, "decompose", &closure, true);
    return kExitOk;
}

int cmd_assess(const RunConfig& cfg)
{
    ensure_out_dir(cfg);
    auto run = load_and_validate(cfg);
    if (!run.report.passed()) {
        emit_table(validation_table(run.report), cfg);
        write_manifest(cfg, "assess", nullptr, false);
        std::cerr << "error: panel validation failed\n";
        return kExitInput;
    }

    const auto identity = identity_for(cfg);
    const auto closure = divisia::check_closure(identity, run.panel, cfg.closure_tol);
    if (!closure.passed) {
        write_manifest(cfg, "assess", &closure, true);
        std::cerr << "error: identity closure fails, max relative residual "
                  << closure.max_residual << " exceeds " << cfg.closure_tol << "\n";
        return kExitNumeric;
    }

    const auto span = parse_span(cfg, run.panel);
    const auto chained = divisia::chain_decompose(identity, run.panel, span, parse_mode(cfg.mode),
                                                  decompose_options(cfg));
    divisia::AssessOptions assess;
    assess.sign_scope = parse_sign_scope(cfg.sign_scope);
    assess.convention = parse_convention(cfg.household_convention);
    const auto records = divisia::assess_series(chained, run.panel, assess);

    const auto band = band_for(cfg);
    std::vector<divisia::BandedRecord> banded;
    if (band) banded = divisia::apply_band(records, *band);

    divisia::Table mitigation;
    mitigation.name = "mitigation";
    mitigation.columns = {"year", "intensity_kg_per_household", "total_mtco2",
                          "per_capita_kg", "per_floor_kg", "households_used"};
    if (band) {
        for (const char* c : {"intensity_low", "intensity_high", "total_low", "total_high"}) {
            mitigation.columns.emplace_back(c);
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto scales = divisia::rescale(r, run.panel);
        std::vector<divisia::Table::Cell> row{static_cast<std::int64_t>(r.year()), r.intensity,
                                              r.total, scales.per_capita, scales.per_floor,
                                              r.households_used};
        if (band) {
            row.emplace_back(banded[i].intensity_low);
            row.emplace_back(banded[i].intensity_high);
            row.emplace_back(banded[i].total_low);
            row.emplace_back(banded[i].total_high);
        }
        mitigation.add_row(std::move(row));
    }
    emit_table(mitigation, cfg);

    const auto savings = divisia::to_coal_equivalent(
        records, run.panel,
        cfg.coal_factor > 0.0 ? std::optional<double>(cfg.coal_factor) : std::nullopt);
    divisia::Table savings_table;
    savings_table.name = "savings";
    savings_table.columns = {"year", "mtce", "factor_tco2_per_tce"};
    for (const auto& s : savings) {
        savings_table.add_row({static_cast<std::int64_t>(s.year), s.mtce, s.factor});
    }
    emit_table(savings_table, cfg);

    if (!cfg.periods.empty()) {
        const auto periods = divisia::load_periods(cfg.periods);
        const auto aggregates = divisia::aggregate_periods(records, periods);
        divisia::Table period_table;
        period_table.name = "periods";
        period_table.columns = {"label", "first_year", "last_year", "total_mtco2",
                                "mean_intensity", "records"};
        for (const auto& a : aggregates) {
            period_table.add_row({a.label, static_cast<std::int64_t>(a.first_year),
                                  static_cast<std::int64_t>(a.last_year), a.total,
                                  a.mean_intensity, static_cast<std::int64_t>(a.record_count)});
        }
        emit_table(period_table, cfg);

        if (!cfg.targets.empty()) {
            const auto targets = divisia::load_targets(cfg.targets);
            const auto by_period = divisia::sum_savings_by_period(savings, periods);
            const auto comparisons = divisia::compare_official(by_period, targets);
            divisia::Table compare_table;
            compare_table.name = "savings_comparison";
            compare_table.columns = {"label", "assessed_mtce", "expected_mtce", "coverage"};
            for (const auto& c : comparisons) {
                compare_table.add_row({c.label, c.assessed, c.expected, c.coverage});
            }
            emit_table(compare_table, cfg);
        }
    }

    if (records.size() >= 2) {
        divisia::Table trends;
        trends.name = "trends";
        trends.columns = {"series", "slope_per_year", "intercept", "r_squared"};
        std::vector<std::pair<int, double>> intensity, total, per_capita, per_floor;
        for (const auto& r : records) {
            const auto scales = divisia::rescale(r, run.panel);
            intensity.emplace_back(r.year(), r.intensity);
            total.emplace_back(r.year(), r.total);
            per_capita.emplace_back(r.year(), scales.per_capita);
            per_floor.emplace_back(r.year(), scales.per_floor);
        }
        const std::vector<std::pair<std::string, std::vector<std::pair<int, double>>*>> series{
            {"intensity", &intensity},
            {"total", &total},
            {"per_capita", &per_capita},
            {"per_floor", &per_floor}};
        for (const auto& [name, points] : series) {
            const auto fit = divisia::fit_trend(*points);
            trends.add_row({name, fit.slope, fit.intercept, fit.r_squared});
        }
        emit_table(trends, cfg);
    }

    write_manifest(cfg, "assess", &closure, true);
    return kExitOk;
}

int cmd_emit_identity(const std::string& path)
{
    divisia::save_identity(divisia::builtin_residential_identity(), path);
    return kExitOk;
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, bool needs_input)
{
    auto* input = cmd->add_option("-i,--input", cfg.input, "panel CSV file");
    if (needs_input) input->required();
    cmd->add_option("--schema", cfg.schema, "column schema JSON (default: builtin layout)");
    cmd->add_option("-o,--out", cfg.out, "output directory")->required();
    cmd->add_option("--delimiter", cfg.delimiter, "field delimiter (default ',')");
    cmd->add_option("--group-tol", cfg.group_tol, "group sum tolerance, relative");
    cmd->add_option("--report-precision", cfg.precision, "decimal places in CSV output")
        ->check(CLI::Range(0, 17));
    cmd->add_option("--format", cfg.format, "output format: csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    cmd->add_flag("--renormalize-groups", cfg.renormalize,
                  "rescale group members to match stored totals");
}

void add_decompose_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--identity", cfg.identity, "identity JSON (default: builtin)");
    cmd->add_option("--span", cfg.span, "year span first:last (default: whole panel)");
    cmd->add_option("--mode", cfg.mode, "aggregate or sectoral")
        ->check(CLI::IsMember({"aggregate", "sectoral"}));
    cmd->add_option("--zero-policy", cfg.zero_policy, "delta or reject")
        ->check(CLI::IsMember({"delta", "reject"}));
    cmd->add_option("--log-mean-variant", cfg.log_mean_variant,
                    "L(a,a): analytic limit or zero")
        ->check(CLI::IsMember({"limit", "zero"}));
    cmd->add_option("--closure-tol", cfg.closure_tol, "closure tolerance, relative");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"unit-aware Kaya/LMDI decomposition and mitigation assessment"};
    app.set_version_flag("--version", std::string(divisia::version));
    app.require_subcommand(1);
    app.set_config("--config");

    RunConfig cfg;
    std::string identity_path;

    auto* validate = app.add_subcommand("validate", "check a panel against its invariants");
    add_common_options(validate, cfg, true);

    auto* decompose = app.add_subcommand("decompose", "additive LMDI effects per interval");
    add_common_options(decompose, cfg, true);
    add_decompose_options(decompose, cfg);

    auto* assess = app.add_subcommand("assess", "mitigation intensity, totals and reports");
    add_common_options(assess, cfg, true);
    add_decompose_options(assess, cfg);
    assess->add_option("--sign-scope", cfg.sign_scope, "factor or sector negativity")
        ->check(CLI::IsMember({"factor", "sector"}));
    assess->add_option("--household-convention", cfg.household_convention,
                       "household stock: end, start or logmean")
        ->check(CLI::IsMember({"end", "start", "logmean"}));
    assess->add_option("--periods", cfg.periods, "period definitions CSV");
    assess->add_option("--targets", cfg.targets, "official savings targets CSV");
    assess->add_option("--coal-factor", cfg.coal_factor,
                       "constant tCO2-per-tce conversion (default: panel C/E)");
    assess->add_option("--band-intensity", cfg.band_intensity,
                       "intensity band half-width (kg per household, or fraction)");
    assess->add_option("--band-total", cfg.band_total,
                       "total band half-width (MtCO2, or fraction)");
    assess->add_option("--band-kind", cfg.band_kind, "absolute or relative")
        ->check(CLI::IsMember({"absolute", "relative"}));

    auto* emit = app.add_subcommand("emit-identity", "write the builtin identity for editing");
    emit->add_option("path", identity_path, "destination file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (validate->parsed()) return cmd_validate(cfg);
        if (decompose->parsed()) return cmd_decompose(cfg);
        if (assess->parsed()) return cmd_assess(cfg);
        if (emit->parsed()) return cmd_emit_identity(identity_path);
    } catch (const divisia::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const divisia::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const divisia::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
