#pragma once

#include <array>
#include <cstddef>

#include "nutrec/types.hpp"

namespace nutrec {

// One WHO rule per macro-nutrient. Percent rules are shares of total energy;
// absolute rules are gram bounds applied after rescaling to a 2000 kcal basis,
// which makes the whole score serving-size invariant.
struct WhoRule {
    enum class Kind { percentRange, percentBelow, gramsBelow, gramsAbove };
    Kind kind;
    double lo = 0.0;  // percentRange only
    double hi = 0.0;  // range upper bound, or the one-sided threshold
};

using WhoGuideline = std::array<WhoRule, NutrientVector::kMacroCount>;

// Rules in macro order: protein, carbohydrates, sugars, fat, saturated fat,
// sodium, fiber.
inline const WhoGuideline& default_who_guideline() {
    static const WhoGuideline g = {{
        {WhoRule::Kind::percentRange, 10.0, 15.0},
        {WhoRule::Kind::percentRange, 55.0, 75.0},
        {WhoRule::Kind::percentBelow, 0.0, 10.0},
        {WhoRule::Kind::percentRange, 15.0, 30.0},
        {WhoRule::Kind::percentBelow, 0.0, 10.0},
        {WhoRule::Kind::gramsBelow, 0.0, 2.0},
        {WhoRule::Kind::gramsAbove, 0.0, 25.0},
    }};
    return g;
}

inline constexpr double kTargetEnergyKcal = 2000.0;

// Day-level macro-nutrient targets on a 2000 kcal basis. Ranges use their
// midpoint; one-sided bounds use a 1.5 multiplier toward the allowed side.
inline NutrientVector default_targets() {
    NutrientVector t;
    t.protein = 62.5;
    t.carbohydrates = 325.0;
    t.sugars = 33.3;
    t.fat = 50.0;
    t.saturatedFat = 14.8;
    t.sodium = 1.33;
    t.fiber = 37.5;
    t.energy = kTargetEnergyKcal;
    return t;
}

// Share of total energy per energy-bearing nutrient: 4 kcal/g for protein,
// carbohydrates and sugars, 9 kcal/g for fat and saturated fat.
struct EnergyShares {
    bool defined = false;  // false when energy is zero
    double protein = 0.0;
    double carbohydrates = 0.0;
    double sugars = 0.0;
    double fat = 0.0;
    double saturatedFat = 0.0;
};

inline EnergyShares energy_percentages(const NutrientVector& nv) {
    EnergyShares s;
    if (!(nv.energy > 0.0)) return s;
    s.defined = true;
    s.protein = 100.0 * nv.protein * kKcalPerGramProtein / nv.energy;
    s.carbohydrates = 100.0 * nv.carbohydrates * kKcalPerGramCarbs / nv.energy;
    s.sugars = 100.0 * nv.sugars * kKcalPerGramSugars / nv.energy;
    s.fat = 100.0 * nv.fat * kKcalPerGramFat / nv.energy;
    s.saturatedFat = 100.0 * nv.saturatedFat * kKcalPerGramSatFat / nv.energy;
    return s;
}

// Per-rule outcomes; every rule fails on zero energy.
inline std::array<bool, NutrientVector::kMacroCount> who_rule_flags(
    const NutrientVector& nv, const WhoGuideline& guideline = default_who_guideline()) {
    std::array<bool, NutrientVector::kMacroCount> flags{};
    const EnergyShares shares = energy_percentages(nv);
    if (!shares.defined) return flags;

    // sodium and fiber carry no energy; their shares stay 0
    const double percent[NutrientVector::kMacroCount] = {
        shares.protein, shares.carbohydrates, shares.sugars,
        shares.fat, shares.saturatedFat, 0.0, 0.0};
    const double scale = kTargetEnergyKcal / nv.energy;
    const auto macros = nv.macros();

    for (std::size_t i = 0; i < flags.size(); ++i) {
        const WhoRule& rule = guideline[i];
        switch (rule.kind) {
            case WhoRule::Kind::percentRange:
                flags[i] = percent[i] >= rule.lo && percent[i] <= rule.hi;
                break;
            case WhoRule::Kind::percentBelow:
                flags[i] = percent[i] < rule.hi;
                break;
            case WhoRule::Kind::gramsBelow:
                flags[i] = macros[i] * scale < rule.hi;
                break;
            case WhoRule::Kind::gramsAbove:
                flags[i] = macros[i] * scale > rule.hi;
                break;
        }
    }
    return flags;
}

// Number of satisfied WHO rules, 0..7.
inline int who_score(const NutrientVector& nv,
                     const WhoGuideline& guideline = default_who_guideline()) {
    int score = 0;
    for (bool ok : who_rule_flags(nv, guideline))
        if (ok) ++score;
    return score;
}

}  // namespace nutrec
