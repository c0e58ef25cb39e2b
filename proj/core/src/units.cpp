#include "divisia/units.hpp"

#include <array>
#include <cmath>

#include "divisia/errors.hpp"

namespace divisia {
namespace {

struct UnitInfo {
    Unit unit;
    Dimension dim;
    double per_canonical;  // how many of this tag make one canonical unit
    std::string_view name;
};

// Canonical tags carry factor 1. 1 MtCO2 = 1e9 kgCO2; the intensity pairs
// relate as 1 MtCO2 per million households = 1000 kgCO2 per household.
constexpr std::array<UnitInfo, 16> kUnits{{
    {Unit::MtCO2, Dimension::CO2Mass, 1.0, "MtCO2"},
    {Unit::kgCO2, Dimension::CO2Mass, 1e9, "kgCO2"},
    {Unit::Mtce, Dimension::Energy, 1.0, "Mtce"},
    {Unit::Mperson, Dimension::Population, 1.0, "Mperson"},
    {Unit::Mhousehold, Dimension::Households, 1.0, "Mhousehold"},
    {Unit::Mm2, Dimension::FloorArea, 1.0, "Mm2"},
    {Unit::Currency, Dimension::Currency, 1.0, "currency"},
    {Unit::CurrencyPerM2, Dimension::Price, 1.0, "currency_per_m2"},
    {Unit::Dimensionless, Dimension::Dimensionless, 1.0, "dimensionless"},
    {Unit::MtCO2PerMhousehold, Dimension::HouseholdIntensity, 1.0, "MtCO2_per_Mhousehold"},
    {Unit::kgCO2PerHousehold, Dimension::HouseholdIntensity, 1e3, "kgCO2_per_household"},
    {Unit::MtCO2PerMperson, Dimension::CapitaIntensity, 1.0, "MtCO2_per_Mperson"},
    {Unit::kgCO2PerPerson, Dimension::CapitaIntensity, 1e3, "kgCO2_per_person"},
    {Unit::MtCO2PerMm2, Dimension::FloorIntensity, 1.0, "MtCO2_per_Mm2"},
    {Unit::kgCO2PerM2, Dimension::FloorIntensity, 1e3, "kgCO2_per_m2"},
    {Unit::tCO2PerTce, Dimension::EmissionFactor, 1.0, "tCO2_per_tce"},
}};

const UnitInfo& info(Unit u)
{
    for (const auto& entry : kUnits) {
        if (entry.unit == u) return entry;
    }
    throw NumericError("unknown unit tag");
}

} // namespace

Dimension dimension(Unit u)
{
    return info(u).dim;
}

Unit canonical_unit(Dimension d)
{
    for (const auto& entry : kUnits) {
        if (entry.dim == d && entry.per_canonical == 1.0) return entry.unit;
    }
    throw NumericError("dimension without canonical unit");
}

double conversion_factor(Unit from, Unit to)
{
    const auto& a = info(from);
    const auto& b = info(to);
    if (a.dim != b.dim) {
        throw NumericError("incompatible dimensions: cannot convert " +
                           std::string(a.name) + " to " + std::string(b.name));
    }
    return b.per_canonical / a.per_canonical;
}

Quantity convert(const Quantity& q, Unit target)
{
    return {q.value * conversion_factor(q.unit, target), target};
}

std::string_view unit_name(Unit u)
{
    return info(u).name;
}

std::optional<Unit> parse_unit(std::string_view name)
{
    for (const auto& entry : kUnits) {
        if (entry.name == name) return entry.unit;
    }
    return std::nullopt;
}

} // namespace divisia
