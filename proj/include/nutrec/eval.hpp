#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nutrec/amounts.hpp"
#include "nutrec/corpus.hpp"
#include "nutrec/nutrition.hpp"
#include "nutrec/recommender.hpp"
#include "nutrec/rng.hpp"
#include "nutrec/types.hpp"

namespace nutrec {

struct RankMetrics {
    double pctTop10 = 0.0;  // percent of held-out ingredients ranked in the top 10
    double meanRank = 0.0;
    double medianRank = 0.0;
    std::size_t evaluated = 0;
};

// Shared number formatting for report files: fixed format, locale-free.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Missing-ingredient evaluation: remove one uniformly chosen ingredient per
// recipe, ask the predictor to rank the full vocabulary given the rest, and
// record the 1-based rank of the removed one.
inline RankMetrics eval_missing_ingredient(const IngredientRanker& predictor,
                                           const Corpus& corpus,
                                           std::span<const std::size_t> recipeIndices,
                                           std::uint64_t seed) {
    if (recipeIndices.empty()) throw DataError("missing-ingredient eval: no recipes");
    std::mt19937 rng(static_cast<std::uint32_t>(seed));

    std::vector<double> ranks;
    ranks.reserve(recipeIndices.size());
    for (std::size_t idx : recipeIndices) {
        const Recipe& r = corpus.recipes[idx];
        const std::size_t drop = draw_below(rng, r.entries.size());
        const IngredientId removed = r.entries[drop].ingredient;

        std::vector<IngredientId> given;
        given.reserve(r.entries.size() - 1);
        for (std::size_t i = 0; i < r.entries.size(); ++i)
            if (i != drop) given.push_back(r.entries[i].ingredient);

        const auto ranking = predictor(given, corpus.vocabularySize);
        double rank = 0.0;
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            if (ranking[i].id == removed) {
                rank = static_cast<double>(i + 1);
                break;
            }
        }
        if (rank == 0.0)
            throw DataError("predictor did not rank held-out ingredient " +
                            std::to_string(removed));
        ranks.push_back(rank);
    }

    RankMetrics m;
    m.evaluated = ranks.size();
    double inTop10 = 0.0, sum = 0.0;
    for (double r : ranks) {
        sum += r;
        if (r <= 10.0) inTop10 += 1.0;
    }
    m.pctTop10 = 100.0 * inTop10 / static_cast<double>(ranks.size());
    m.meanRank = sum / static_cast<double>(ranks.size());
    std::sort(ranks.begin(), ranks.end());
    const std::size_t n = ranks.size();
    m.medianRank = (n % 2 == 1) ? ranks[n / 2] : 0.5 * (ranks[n / 2 - 1] + ranks[n / 2]);
    return m;
}

struct FrequentItemsets {
    std::vector<std::vector<IngredientId>> sets;
    bool flaggedShort = false;  // fewer qualifying sets than requested
};

namespace detail {

template <typename Fn>
void for_each_combination(std::span<const IngredientId> items, std::size_t setSize,
                          std::vector<IngredientId>& scratch, std::size_t start, Fn&& fn) {
    if (scratch.size() == setSize) {
        fn(scratch);
        return;
    }
    const std::size_t need = setSize - scratch.size();
    for (std::size_t i = start; i + need <= items.size(); ++i) {
        scratch.push_back(items[i]);
        for_each_combination(items, setSize, scratch, i + 1, fn);
        scratch.pop_back();
    }
}

}  // namespace detail

// The most common size-`setSize` ingredient combinations in the training
// split (support >= 2). Ordered by support, then lexicographically, so the
// result is stable across runs.
inline FrequentItemsets top_frequent_itemsets(const Corpus& corpus, std::size_t setSize,
                                              std::size_t count) {
    if (setSize < 1) throw DataError("itemset size must be >= 1");
    if (!corpus.hasSplits()) throw DataError("corpus has no train/validation/test split");

    std::map<std::vector<IngredientId>, std::uint32_t> support;
    std::vector<IngredientId> scratch;
    for (std::size_t idx : corpus.indicesOf(Split::train)) {
        const std::vector<IngredientId> ids = corpus.recipes[idx].ingredientIds();
        if (ids.size() < setSize) continue;
        detail::for_each_combination(ids, setSize, scratch, 0,
                                     [&support](const std::vector<IngredientId>& s) {
                                         ++support[s];
                                     });
    }

    // std::map iterates in lexicographic order; a stable sort by support then
    // keeps that order within equal support.
    std::vector<std::pair<std::vector<IngredientId>, std::uint32_t>> qualified;
    for (const auto& [set, sup] : support)
        if (sup >= 2) qualified.emplace_back(set, sup);
    std::stable_sort(qualified.begin(), qualified.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    FrequentItemsets out;
    out.flaggedShort = qualified.size() < count;
    const std::size_t take = std::min(count, qualified.size());
    out.sets.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.sets.push_back(std::move(qualified[i].first));
    return out;
}

// Reference point for the WHO sweep: the mean WHO score of every corpus
// recipe containing the seed set, i.e. what a random draw among matching
// real recipes would score in expectation.
inline double random_draw_baseline(const Corpus& corpus, std::span<const IngredientId> seedSet,
                                   const NutrientTable& table) {
    if (seedSet.empty()) throw DataError("random-draw baseline: empty seed set");
    const std::vector<IngredientId> want = canonical_set(seedSet);

    double sum = 0.0;
    std::size_t hits = 0;
    for (const Recipe& r : corpus.recipes) {
        bool all = true;
        for (IngredientId id : want) all = all && r.contains(id);
        if (!all) continue;
        sum += static_cast<double>(who_score(recipe_nutrients(r, table)));
        ++hits;
    }
    if (hits == 0) {
        std::string ids;
        for (IngredientId id : want) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
        throw DataError("no corpus recipe contains the seed set {" + ids + "}");
    }
    return sum / static_cast<double>(hits);
}

struct NamedRanker {
    std::string name;
    IngredientRanker ranker;
};

struct WhoRow {
    std::string predictor;
    double cosWeight = 0.0;
    double meanWho = 0.0;
};

struct WhoReport {
    std::vector<WhoRow> rows;
    double baselineMeanWho = 0.0;
    std::size_t seedSets = 0;
    bool seedsFlaggedShort = false;
};

// Full pipeline sweep: seed sets from frequent itemsets, one pseudo-recipe
// per (predictor, seed), then a recommendation pass per cosine weight. Each
// row pools the WHO scores of all k recommendations over all seed sets.
inline WhoReport eval_nutrec(const Corpus& corpus, const NutrientTable& table,
                             std::span<const NamedRanker> predictors,
                             const AmountModel& amountModel, const RecommendConfig& baseCfg,
                             std::span<const double> cosGrid, std::size_t setSize = 2,
                             std::size_t seedCount = 120) {
    if (predictors.empty()) throw DataError("who sweep: no predictors");
    if (cosGrid.empty()) throw DataError("who sweep: empty cosine-weight grid");

    const FrequentItemsets seeds = top_frequent_itemsets(corpus, setSize, seedCount);
    if (seeds.sets.empty()) throw DataError("who sweep: no frequent itemsets qualified");

    WhoReport report;
    report.seedSets = seeds.sets.size();
    report.seedsFlaggedShort = seeds.flaggedShort;

    double baselineSum = 0.0;
    for (const auto& s : seeds.sets) baselineSum += random_draw_baseline(corpus, s, table);
    report.baselineMeanWho = baselineSum / static_cast<double>(seeds.sets.size());

    std::vector<double> whoByRecipe;
    whoByRecipe.reserve(corpus.recipes.size());
    for (const Recipe& r : corpus.recipes)
        whoByRecipe.push_back(static_cast<double>(who_score(recipe_nutrients(r, table))));

    for (const NamedRanker& pred : predictors) {
        std::vector<PseudoRecipe> pseudo;
        pseudo.reserve(seeds.sets.size());
        for (const auto& s : seeds.sets)
            pseudo.push_back(build_pseudo_recipe(s, pred.ranker, amountModel, table, baseCfg));

        for (double cos : cosGrid) {
            RecommendConfig cfg = baseCfg;
            cfg.cosWeight = cos;
            double sum = 0.0;
            std::size_t n = 0;
            for (const PseudoRecipe& pr : pseudo) {
                const RecommendList rec = recommend(pr, corpus, cfg);
                for (const RecommendedRecipe& e : rec.entries) {
                    sum += whoByRecipe[e.recipeIndex];
                    ++n;
                }
            }
            report.rows.push_back({pred.name, cos, sum / static_cast<double>(n)});
        }
    }
    return report;
}

inline void write_rank_csv(std::ostream& os,
                           std::span<const std::pair<std::string, RankMetrics>> rows) {
    os << "predictor,pct_top10,mean_rank,median_rank,evaluated\n";
    for (const auto& [name, m] : rows)
        os << name << ',' << format_double(m.pctTop10) << ',' << format_double(m.meanRank)
           << ',' << format_double(m.medianRank) << ',' << m.evaluated << '\n';
}

inline void write_who_csv(std::ostream& os, const WhoReport& report) {
    os << "predictor,cos_weight,mean_who,baseline_mean_who\n";
    for (const WhoRow& row : report.rows)
        os << row.predictor << ',' << format_double(row.cosWeight) << ','
           << format_double(row.meanWho) << ',' << format_double(report.baselineMeanWho)
           << '\n';
}

}  // namespace nutrec
