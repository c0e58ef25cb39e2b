#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace divisia {

/// Unit tags understood by the toolkit. Base quantities use the canonical
/// mega-scale tags; the per-household / per-capita / per-floor tags exist so
/// that reported intensities carry their own convertible unit.
enum class Unit {
    MtCO2,                // million tons of CO2
    kgCO2,                // kilograms of CO2
    Mtce,                 // million tons of standard coal equivalent
    Mperson,              // million persons
    Mhousehold,           // million households
    Mm2,                  // million square meters of floor space
    Currency,             // nominal currency units
    CurrencyPerM2,        // nominal currency per square meter
    Dimensionless,
    MtCO2PerMhousehold,
    kgCO2PerHousehold,
    MtCO2PerMperson,
    kgCO2PerPerson,
    MtCO2PerMm2,
    kgCO2PerM2,
    tCO2PerTce,           // emission factor, numerically C[MtCO2]/E[Mtce]
};

enum class Dimension {
    CO2Mass,
    Energy,
    Population,
    Households,
    FloorArea,
    Currency,
    Price,
    Dimensionless,
    HouseholdIntensity,
    CapitaIntensity,
    FloorIntensity,
    EmissionFactor,
};

/// A value tagged with its unit.
struct Quantity {
    double value = 0.0;
    Unit unit = Unit::Dimensionless;
};

Dimension dimension(Unit u);

/// Canonical tag values are normalized to on load (the mega-scale tags).
Unit canonical_unit(Dimension d);

/// Multiplier turning a value in `from` into the same quantity in `to`.
/// Throws NumericError when the tags live in different dimensions.
double conversion_factor(Unit from, Unit to);

Quantity convert(const Quantity& q, Unit target);

std::string_view unit_name(Unit u);
std::optional<Unit> parse_unit(std::string_view name);

} // namespace divisia
