#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nutrec {

// Dense ingredient index in [0, m). Ids are assigned by the nutrient table
// in file order and stay stable for the lifetime of a corpus.
using IngredientId = std::uint32_t;

// Raised on bad input data (files, arguments, degenerate corpora).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a model file was trained against a different vocabulary.
struct ModelCompatError : std::runtime_error {
    explicit ModelCompatError(const std::string& msg) : std::runtime_error(msg) {}
};

// kcal per gram for the energy-bearing macro-nutrients.
inline constexpr double kKcalPerGramProtein = 4.0;
inline constexpr double kKcalPerGramCarbs = 4.0;
inline constexpr double kKcalPerGramSugars = 4.0;
inline constexpr double kKcalPerGramFat = 9.0;
inline constexpr double kKcalPerGramSatFat = 9.0;

// The seven macro-nutrients plus energy. Grams except energy (kcal).
struct NutrientVector {
    double protein = 0.0;
    double carbohydrates = 0.0;
    double sugars = 0.0;
    double fat = 0.0;
    double saturatedFat = 0.0;
    double sodium = 0.0;
    double fiber = 0.0;
    double energy = 0.0;

    static constexpr std::size_t kMacroCount = 7;

    // The seven macro-nutrients in declaration order, energy excluded.
    std::array<double, kMacroCount> macros() const {
        return {protein, carbohydrates, sugars, fat, saturatedFat, sodium, fiber};
    }

    bool allFinite() const {
        for (double v : macros())
            if (!std::isfinite(v)) return false;
        return std::isfinite(energy);
    }

    bool allNonnegative() const {
        for (double v : macros())
            if (v < 0.0) return false;
        return energy >= 0.0;
    }

    NutrientVector& operator+=(const NutrientVector& o) {
        protein += o.protein;
        carbohydrates += o.carbohydrates;
        sugars += o.sugars;
        fat += o.fat;
        saturatedFat += o.saturatedFat;
        sodium += o.sodium;
        fiber += o.fiber;
        energy += o.energy;
        return *this;
    }

    NutrientVector scaled(double s) const {
        return {protein * s, carbohydrates * s, sugars * s, fat * s,
                saturatedFat * s, sodium * s, fiber * s, energy * s};
    }
};

struct RecipeEntry {
    IngredientId ingredient = 0;
    double grams = 0.0;
};

// A parsed recipe. Entries are unique per ingredient and sorted by id.
struct Recipe {
    std::string id;
    std::vector<RecipeEntry> entries;

    bool contains(IngredientId i) const {
        for (const auto& e : entries)
            if (e.ingredient == i) return true;
        return false;
    }

    std::vector<IngredientId> ingredientIds() const {
        std::vector<IngredientId> ids;
        ids.reserve(entries.size());
        for (const auto& e : entries) ids.push_back(e.ingredient);
        return ids;
    }
};

// Per-100g nutrient profiles plus canonical names, indexed by IngredientId.
struct NutrientTable {
    std::vector<std::string> names;
    std::vector<NutrientVector> per100g;
    std::unordered_map<std::string, IngredientId> index;
    std::uint64_t vocabHash = 0;

    std::size_t size() const { return names.size(); }
};

enum class Split : std::uint8_t { train = 0, validation = 1, test = 2 };

struct LoadStats {
    std::size_t droppedRecipes = 0;   // fewer than 2 distinct ingredients
    std::size_t skippedEntries = 0;   // unknown name or nonpositive grams
};

struct Corpus {
    std::vector<Recipe> recipes;
    std::uint32_t vocabularySize = 0;
    std::vector<Split> splits;        // parallel to recipes; empty until split_corpus
    LoadStats stats;

    bool hasSplits() const { return splits.size() == recipes.size(); }

    std::vector<std::size_t> indicesOf(Split s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < splits.size(); ++i)
            if (splits[i] == s) out.push_back(i);
        return out;
    }
};

struct ScoredIngredient {
    IngredientId id = 0;
    double score = 0.0;
};

// Ranked ingredient completion: given a non-empty ingredient set, returns up
// to topN candidates excluding the given ones, best first, ties by ascending id.
using IngredientRanker =
    std::function<std::vector<ScoredIngredient>(std::span<const IngredientId>, std::size_t)>;

// Canonical ranking order: score descending, id ascending on ties.
inline void sort_ranked(std::vector<ScoredIngredient>& v) {
    std::sort(v.begin(), v.end(), [](const ScoredIngredient& a, const ScoredIngredient& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

// Sorted unique copy of an id set; the canonical in-memory set form.
inline std::vector<IngredientId> canonical_set(std::span<const IngredientId> ids) {
    std::vector<IngredientId> out(ids.begin(), ids.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline bool set_contains(std::span<const IngredientId> sortedSet, IngredientId id) {
    return std::binary_search(sortedSet.begin(), sortedSet.end(), id);
}

}  // namespace nutrec
