#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nutrec/rng.hpp"
#include "nutrec/serialize.hpp"
#include "nutrec/types.hpp"

namespace nutrec {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace detail

// Nutrient table CSV: header row with columns name, protein, carbs, sugars,
// fat, satfat, sodium, fiber, energy (any order, values per 100 g). Ids are
// assigned densely in file order. Data rows are numbered from 1 in errors.
inline NutrientTable load_nutrient_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open nutrient table: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty nutrient table: " + path);
    const std::vector<std::string> header = detail::split_csv_line(line);

    const char* wanted[9] = {"name", "protein", "carbs", "sugars", "fat",
                             "satfat", "sodium", "fiber", "energy"};
    int col[9];
    for (int w = 0; w < 9; ++w) {
        col[w] = -1;
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == wanted[w]) col[w] = static_cast<int>(i);
        if (col[w] < 0) throw DataError(std::string("missing column '") + wanted[w] + "' in " + path);
    }

    NutrientTable table;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() < header.size())
            throw DataError("short row " + std::to_string(row) + " in " + path);

        const std::string name = f[static_cast<std::size_t>(col[0])];
        if (name.empty()) throw DataError("empty name at row " + std::to_string(row));
        if (table.index.count(name))
            throw DataError("duplicate ingredient '" + name + "' at row " + std::to_string(row));

        double v[8];
        for (int w = 1; w < 9; ++w) {
            const std::string& cell = f[static_cast<std::size_t>(col[w])];
            try {
                std::size_t pos = 0;
                v[w - 1] = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw DataError("bad number '" + cell + "' at row " + std::to_string(row));
            }
            if (!std::isfinite(v[w - 1]))
                throw DataError("non-finite nutrient at row " + std::to_string(row));
            if (v[w - 1] < 0.0)
                throw DataError("negative nutrient at row " + std::to_string(row));
        }

        table.index.emplace(name, static_cast<IngredientId>(table.names.size()));
        table.names.push_back(name);
        table.per100g.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
    }
    if (table.names.empty()) throw DataError("nutrient table has no rows: " + path);
    table.vocabHash = vocabulary_hash(table.names);
    return table;
}

// Recipes come as JSON lines: {"id": str, "ingredients": [{"name": str,
// "grams": number}]}. Entries with unknown names or nonpositive grams are
// skipped (counted in stats); duplicate ingredients are merged by summing;
// recipes left with fewer than 2 distinct ingredients are dropped.
inline Corpus load_recipes(const std::string& path, const NutrientTable& table) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open recipes: " + path);

    Corpus corpus;
    corpus.vocabularySize = static_cast<std::uint32_t>(table.size());

    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (detail::trim(line).empty()) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw DataError("malformed recipe line " + std::to_string(lineNo) + " in " + path);
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
            !j.contains("ingredients") || !j["ingredients"].is_array())
            throw DataError("malformed recipe line " + std::to_string(lineNo) + " in " + path);

        Recipe r;
        r.id = j["id"].get<std::string>();
        for (const auto& e : j["ingredients"]) {
            if (!e.is_object() || !e.contains("name") || !e["name"].is_string() ||
                !e.contains("grams") || !e["grams"].is_number())
                throw DataError("malformed recipe line " + std::to_string(lineNo) + " in " + path);
            const std::string name = e["name"].get<std::string>();
            const double grams = e["grams"].get<double>();
            const auto it = table.index.find(name);
            if (it == table.index.end() || !(grams > 0.0) || !std::isfinite(grams)) {
                ++corpus.stats.skippedEntries;
                continue;
            }
            bool merged = false;
            for (auto& existing : r.entries)
                if (existing.ingredient == it->second) {
                    existing.grams += grams;
                    merged = true;
                    break;
                }
            if (!merged) r.entries.push_back({it->second, grams});
        }

        if (r.entries.size() < 2) {
            ++corpus.stats.droppedRecipes;
            continue;
        }
        std::sort(r.entries.begin(), r.entries.end(),
                  [](const RecipeEntry& a, const RecipeEntry& b) { return a.ingredient < b.ingredient; });
        corpus.recipes.push_back(std::move(r));
    }
    return corpus;
}

// Deterministic 8:1:1 split: train = round(0.8 n), validation = round(0.1 n),
// the remainder is test.
inline Corpus split_corpus(const Corpus& corpus, std::uint32_t seed) {
    const std::size_t n = corpus.recipes.size();
    if (n < 10) throw DataError("corpus too small to split: " + std::to_string(n) + " recipes");

    const auto trainN = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    const auto valN = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937 rng(seed);
    shuffle_deterministic(std::span<std::size_t>(order), rng);

    Corpus out = corpus;
    out.splits.assign(n, Split::test);
    for (std::size_t k = 0; k < trainN; ++k) out.splits[order[k]] = Split::train;
    for (std::size_t k = trainN; k < trainN + valN; ++k) out.splits[order[k]] = Split::validation;
    return out;
}

// Component-wise sum of (grams / 100) * per-100g profile over the entries.
inline NutrientVector recipe_nutrients(const Recipe& recipe, const NutrientTable& table) {
    NutrientVector total;
    for (const auto& e : recipe.entries) {
        if (e.ingredient >= table.size())
            throw DataError("ingredient id " + std::to_string(e.ingredient) + " not in nutrient table");
        total += table.per100g[e.ingredient].scaled(e.grams / 100.0);
    }
    return total;
}

// --- corpus cache (binary, written by the ingest command) ---

inline void save_corpus_cache(const std::string& path, const NutrientTable& table, const Corpus& corpus) {
    ByteWriter w(path);
    w.bytes("NRC1", 4);
    w.u64(table.vocabHash);
    w.u32(static_cast<std::uint32_t>(table.size()));
    for (std::size_t i = 0; i < table.size(); ++i) {
        w.str(table.names[i]);
        const NutrientVector& nv = table.per100g[i];
        for (double v : nv.macros()) w.f64(v);
        w.f64(nv.energy);
    }
    w.u32(static_cast<std::uint32_t>(corpus.recipes.size()));
    const bool hasSplits = corpus.hasSplits();
    w.u8(hasSplits ? 1 : 0);
    for (std::size_t i = 0; i < corpus.recipes.size(); ++i) {
        const Recipe& r = corpus.recipes[i];
        w.str(r.id);
        w.u32(static_cast<std::uint32_t>(r.entries.size()));
        for (const auto& e : r.entries) {
            w.u32(e.ingredient);
            w.f64(e.grams);
        }
        if (hasSplits) w.u8(static_cast<std::uint8_t>(corpus.splits[i]));
    }
    w.u64(corpus.stats.droppedRecipes);
    w.u64(corpus.stats.skippedEntries);
    w.finish(path);
}

inline std::pair<NutrientTable, Corpus> load_corpus_cache(const std::string& path) {
    ByteReader r(path);
    expect_tag(r, "NRC1");

    NutrientTable table;
    table.vocabHash = r.u64();
    const std::uint32_t m = r.u32();
    for (std::uint32_t i = 0; i < m; ++i) {
        std::string name = r.str();
        NutrientVector nv;
        nv.protein = r.f64();
        nv.carbohydrates = r.f64();
        nv.sugars = r.f64();
        nv.fat = r.f64();
        nv.saturatedFat = r.f64();
        nv.sodium = r.f64();
        nv.fiber = r.f64();
        nv.energy = r.f64();
        table.index.emplace(name, i);
        table.names.push_back(std::move(name));
        table.per100g.push_back(nv);
    }
    if (table.vocabHash != vocabulary_hash(table.names))
        throw DataError("corrupt corpus cache (vocabulary hash mismatch): " + path);

    Corpus corpus;
    corpus.vocabularySize = m;
    const std::uint32_t recipeCount = r.u32();
    const bool hasSplits = r.u8() != 0;
    corpus.recipes.reserve(recipeCount);
    if (hasSplits) corpus.splits.reserve(recipeCount);
    for (std::uint32_t i = 0; i < recipeCount; ++i) {
        Recipe rec;
        rec.id = r.str();
        const std::uint32_t entries = r.u32();
        rec.entries.reserve(entries);
        for (std::uint32_t k = 0; k < entries; ++k) {
            RecipeEntry e;
            e.ingredient = r.u32();
            e.grams = r.f64();
            rec.entries.push_back(e);
        }
        corpus.recipes.push_back(std::move(rec));
        if (hasSplits) corpus.splits.push_back(static_cast<Split>(r.u8()));
    }
    corpus.stats.droppedRecipes = r.u64();
    corpus.stats.skippedEntries = r.u64();
    return {std::move(table), std::move(corpus)};
}

}  // namespace nutrec
