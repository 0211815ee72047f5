#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nutrec/amounts.hpp"
#include "nutrec/corpus.hpp"
#include "nutrec/nutrition.hpp"
#include "nutrec/types.hpp"

namespace nutrec {

// Greedily assembled ingredient list with predicted amounts. `ingredients`
// keeps insertion order: the initial set first, then one entry per accepted
// greedy step. mseTrace holds the MSE after each accepted addition.
struct PseudoRecipe {
    std::vector<IngredientId> ingredients;
    std::vector<double> amounts;  // grams, parallel to ingredients
    NutrientVector nutrients;
    std::vector<double> mseTrace;
};

struct RecommendConfig {
    std::size_t addCap = 5;         // n: max ingredients added to the pseudo-recipe
    std::size_t resultCount = 10;   // k
    double cosWeight = 0.9;
    std::size_t candidatePool = 20;  // N_i: candidates taken from the predictor
    NutrientVector targets = default_targets();
    double targetScale = 1.0;       // optional per-meal scaling of the targets
    bool normalizedMse = false;     // experimental; never used by the defaults
};

// Mean squared difference over the 7 macro-nutrients (energy excluded).
inline double candidate_mse(const NutrientVector& targets, const NutrientVector& predicted,
                            bool normalized = false) {
    const auto t = targets.macros();
    const auto p = predicted.macros();
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double d = t[i] - p[i];
        if (normalized && t[i] > 0.0) d /= t[i];
        sum += d * d;
    }
    return sum / static_cast<double>(t.size());
}

// Predicted amounts for a hypothesized ingredient set, restricted to its
// members (the network emits values for all m ingredients; everything outside
// the set is treated as absent), plus the resulting nutrient totals.
struct SetPrediction {
    std::vector<double> memberAmounts;  // parallel to the set
    NutrientVector nutrients;
};

inline SetPrediction predict_set_nutrients(std::span<const IngredientId> members,
                                           const AmountModel& amountModel,
                                           const NutrientTable& table) {
    const std::vector<double> all = predict_amounts(amountModel, members);
    SetPrediction out;
    out.memberAmounts.reserve(members.size());
    for (IngredientId id : members) {
        if (id >= table.size())
            throw DataError("ingredient id " + std::to_string(id) + " not in nutrient table");
        out.memberAmounts.push_back(all[id]);
    }
    // Accumulate in ascending id order so the total does not depend on how
    // the caller ordered the set.
    for (IngredientId id : canonical_set(members))
        out.nutrients += table.per100g[id].scaled(all[id] / 100.0);
    return out;
}

inline NutrientVector scaled_targets(const RecommendConfig& cfg) {
    return cfg.targetScale == 1.0 ? cfg.targets : cfg.targets.scaled(cfg.targetScale);
}

// One greedy step: try each of the top-N_i candidates, predict amounts for
// the extended set, and return the candidate with the lowest MSE against the
// targets. Returns nothing when no candidate improves on the current set's
// MSE (the halting rule) or the predictor has no candidates.
inline std::optional<std::pair<IngredientId, double>> find_best_ingredient(
    std::span<const IngredientId> prSet, const IngredientRanker& predictor,
    const AmountModel& amountModel, const NutrientTable& table, const RecommendConfig& cfg) {
    if (prSet.empty()) throw DataError("find_best_ingredient: empty ingredient set");

    const NutrientVector targets = scaled_targets(cfg);
    const double currentMse =
        candidate_mse(targets, predict_set_nutrients(prSet, amountModel, table).nutrients,
                      cfg.normalizedMse);

    const std::vector<ScoredIngredient> candidates = predictor(prSet, cfg.candidatePool);
    std::optional<std::pair<IngredientId, double>> best;
    std::vector<IngredientId> extended(prSet.begin(), prSet.end());
    extended.push_back(0);
    for (const ScoredIngredient& cand : candidates) {
        extended.back() = cand.id;
        const double mse = candidate_mse(
            targets, predict_set_nutrients(extended, amountModel, table).nutrients,
            cfg.normalizedMse);
        if (!best || mse < best->second || (mse == best->second && cand.id < best->first))
            best = {cand.id, mse};
    }
    if (!best || best->second >= currentMse) return std::nullopt;
    return best;
}

// Alg-style greedy construction: up to n additions, early-stopped when no
// candidate lowers the MSE. Final amounts come from one prediction on the
// final set.
inline PseudoRecipe build_pseudo_recipe(std::span<const IngredientId> initial,
                                        const IngredientRanker& predictor,
                                        const AmountModel& amountModel,
                                        const NutrientTable& table,
                                        const RecommendConfig& cfg) {
    if (initial.empty()) throw DataError("build_pseudo_recipe: empty initial set");

    PseudoRecipe pr;
    for (IngredientId id : initial) {
        bool dup = false;
        for (IngredientId seen : pr.ingredients) dup = dup || seen == id;
        if (!dup) pr.ingredients.push_back(id);
    }

    for (std::size_t step = 0; step < cfg.addCap; ++step) {
        const auto best = find_best_ingredient(pr.ingredients, predictor, amountModel, table, cfg);
        if (!best) break;
        pr.ingredients.push_back(best->first);
        pr.mseTrace.push_back(best->second);
    }

    const SetPrediction fin = predict_set_nutrients(pr.ingredients, amountModel, table);
    pr.amounts = fin.memberAmounts;
    pr.nutrients = fin.nutrients;
    return pr;
}

namespace detail {

// Sorted (id, grams) view of a pseudo-recipe for order-stable arithmetic.
inline std::vector<RecipeEntry> sorted_entries(const PseudoRecipe& pr) {
    std::vector<RecipeEntry> v;
    v.reserve(pr.ingredients.size());
    for (std::size_t i = 0; i < pr.ingredients.size(); ++i)
        v.push_back({pr.ingredients[i], pr.amounts[i]});
    std::sort(v.begin(), v.end(),
              [](const RecipeEntry& a, const RecipeEntry& b) { return a.ingredient < b.ingredient; });
    return v;
}

inline double cosine_similarity(std::span<const RecipeEntry> a, std::span<const RecipeEntry> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].ingredient == b[j].ingredient) {
            dot += a[i].grams * b[j].grams;
            ++i;
            ++j;
        } else if (a[i].ingredient < b[j].ingredient) {
            ++i;
        } else {
            ++j;
        }
    }
    for (const auto& e : a) na += e.grams * e.grams;
    for (const auto& e : b) nb += e.grams * e.grams;
    if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double jaccard_similarity(std::span<const RecipeEntry> a, std::span<const RecipeEntry> b) {
    std::size_t inter = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].ingredient == b[j].ingredient) {
            ++inter;
            ++i;
            ++j;
        } else if (a[i].ingredient < b[j].ingredient) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace detail

// Weighted blend of amount cosine and ingredient-set Jaccard, in [0, 1].
inline double similarity(const PseudoRecipe& pseudo, const Recipe& recipe, double cosWeight) {
    if (pseudo.ingredients.empty() || recipe.entries.empty())
        throw DataError("similarity: empty recipe");
    const std::vector<RecipeEntry> a = detail::sorted_entries(pseudo);
    const double cos = detail::cosine_similarity(a, recipe.entries);
    const double jac = detail::jaccard_similarity(a, recipe.entries);
    return cosWeight * cos + (1.0 - cosWeight) * jac;
}

struct RecommendedRecipe {
    std::size_t recipeIndex = 0;
    double similarity = 0.0;
};

struct RecommendList {
    std::vector<RecommendedRecipe> entries;
    bool shortOfK = false;  // k exceeded the corpus size
};

// Top-k most similar corpus recipes; ties by ascending recipe id.
inline RecommendList recommend(const PseudoRecipe& pseudo, const Corpus& corpus,
                               const RecommendConfig& cfg) {
    if (corpus.recipes.empty()) throw DataError("recommend: empty corpus");
    if (cfg.resultCount < 1) throw DataError("recommend: k must be >= 1");

    RecommendList out;
    out.entries.reserve(corpus.recipes.size());
    for (std::size_t i = 0; i < corpus.recipes.size(); ++i)
        out.entries.push_back({i, similarity(pseudo, corpus.recipes[i], cfg.cosWeight)});

    std::sort(out.entries.begin(), out.entries.end(),
              [&corpus](const RecommendedRecipe& a, const RecommendedRecipe& b) {
                  if (a.similarity != b.similarity) return a.similarity > b.similarity;
                  const std::string& ia = corpus.recipes[a.recipeIndex].id;
                  const std::string& ib = corpus.recipes[b.recipeIndex].id;
                  if (ia != ib) return ia < ib;
                  return a.recipeIndex < b.recipeIndex;
              });

    if (cfg.resultCount < out.entries.size()) {
        out.entries.resize(cfg.resultCount);
    } else if (cfg.resultCount > out.entries.size()) {
        out.shortOfK = true;
    }
    return out;
}

}  // namespace nutrec
