#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nutrec/corpus.hpp"
#include "nutrec/matrix.hpp"
#include "nutrec/nutrition.hpp"
#include "nutrec/rng.hpp"
#include "nutrec/serialize.hpp"
#include "nutrec/types.hpp"

namespace nutrec {

// One-hidden-layer network mapping a binary ingredient-presence vector to
// gram amounts for all m ingredients. ReLU on the hidden layer; the output
// layer is linear and clamped at zero only at inference.
struct AmountModel {
    Matrix w1;               // m x h
    std::vector<double> b1;  // h
    Matrix w2;               // h x m
    std::vector<double> b2;  // m
    std::uint64_t vocabHash = 0;

    std::size_t inputSize() const { return w1.rows; }
    std::size_t hiddenSize() const { return w1.cols; }
};

struct AmountTrainConfig {
    std::size_t hiddenSize = 512;
    double batchFraction = 9.0;  // percent of the training split per batch
    double learningRate = 0.01;
    // When set, the step size decays linearly to this value over the epochs.
    // The absolute-error loss has constant-magnitude gradients, so a fixed
    // step leaves the model orbiting the optimum at a radius proportional to
    // the step; decay shrinks that orbit.
    std::optional<double> finalLearningRate{};
    double momentum = 0.0;
    std::size_t epochs = 100;
    std::uint32_t seed = 42;
};

// Pre-clamp forward pass; training and gradient checks run on this.
inline std::vector<double> forward_raw(const AmountModel& model,
                                       std::span<const IngredientId> present) {
    const std::size_t h = model.hiddenSize();
    const std::size_t m = model.inputSize();

    std::vector<double> hidden(model.b1);
    for (IngredientId id : present) {
        if (id >= m) throw DataError("predict_amounts: ingredient id out of range");
        const auto row = model.w1.row(id);
        for (std::size_t k = 0; k < h; ++k) hidden[k] += row[k];
    }
    for (double& v : hidden) v = v > 0.0 ? v : 0.0;

    std::vector<double> out(model.b2);
    for (std::size_t k = 0; k < h; ++k) {
        if (hidden[k] == 0.0) continue;
        const auto row = model.w2.row(k);
        for (std::size_t j = 0; j < m; ++j) out[j] += hidden[k] * row[j];
    }
    return out;
}

// Gram predictions for all m ingredients given the present set.
inline std::vector<double> predict_amounts(const AmountModel& model,
                                           std::span<const IngredientId> present) {
    if (present.empty()) throw DataError("predict_amounts: empty ingredient set");
    std::vector<double> out = forward_raw(model, present);
    for (double& v : out) v = v > 0.0 ? v : 0.0;
    return out;
}

struct AmountGradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
};

// MAE over all m output positions, averaged over the batch, plus its
// subgradients (sign(0) taken as 0). Shared by the training loop and the
// finite-difference checks.
inline double mae_loss_and_gradients(const AmountModel& model,
                                     std::span<const Recipe* const> batch,
                                     AmountGradients* grads) {
    const std::size_t m = model.inputSize();
    const std::size_t h = model.hiddenSize();
    if (batch.empty()) throw DataError("mae_loss_and_gradients: empty batch");

    if (grads) {
        grads->w1 = Matrix(m, h);
        grads->b1.assign(h, 0.0);
        grads->w2 = Matrix(h, m);
        grads->b2.assign(m, 0.0);
    }

    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(m));
    double loss = 0.0;
    std::vector<double> hidden(h), preact(h), raw(m), actual(m), dOut(m), dHidden(h);

    for (const Recipe* recipe : batch) {
        for (std::size_t k = 0; k < h; ++k) preact[k] = model.b1[k];
        for (const auto& e : recipe->entries) {
            const auto row = model.w1.row(e.ingredient);
            for (std::size_t k = 0; k < h; ++k) preact[k] += row[k];
        }
        for (std::size_t k = 0; k < h; ++k) hidden[k] = preact[k] > 0.0 ? preact[k] : 0.0;

        for (std::size_t j = 0; j < m; ++j) raw[j] = model.b2[j];
        for (std::size_t k = 0; k < h; ++k) {
            if (hidden[k] == 0.0) continue;
            const auto row = model.w2.row(k);
            for (std::size_t j = 0; j < m; ++j) raw[j] += hidden[k] * row[j];
        }

        std::fill(actual.begin(), actual.end(), 0.0);
        for (const auto& e : recipe->entries) actual[e.ingredient] = e.grams;

        for (std::size_t j = 0; j < m; ++j) {
            const double diff = raw[j] - actual[j];
            loss += std::abs(diff) * scale;
            if (diff > 0.0)
                dOut[j] = scale;
            else if (diff < 0.0)
                dOut[j] = -scale;
            else
                dOut[j] = 0.0;
        }
        if (!grads) continue;

        for (std::size_t k = 0; k < h; ++k) {
            if (hidden[k] > 0.0) {
                auto g2 = grads->w2.row(k);
                for (std::size_t j = 0; j < m; ++j) g2[j] += hidden[k] * dOut[j];
            }
        }
        for (std::size_t j = 0; j < m; ++j) grads->b2[j] += dOut[j];

        std::fill(dHidden.begin(), dHidden.end(), 0.0);
        for (std::size_t k = 0; k < h; ++k) {
            if (preact[k] <= 0.0) continue;
            double acc = 0.0;
            const auto row = model.w2.row(k);
            for (std::size_t j = 0; j < m; ++j) acc += row[j] * dOut[j];
            dHidden[k] = acc;
        }
        for (std::size_t k = 0; k < h; ++k) grads->b1[k] += dHidden[k];
        for (const auto& e : recipe->entries) {
            auto g1 = grads->w1.row(e.ingredient);
            for (std::size_t k = 0; k < h; ++k) g1[k] += dHidden[k];
        }
    }
    return loss;
}

// Mini-batch gradient descent on MAE against the actual gram vectors of the
// training split. If minWho is set, training is restricted to recipes with
// who_score > minWho. Deterministic for a fixed seed.
inline AmountModel train_amounts(const Corpus& corpus, const NutrientTable& table,
                                 const AmountTrainConfig& cfg,
                                 std::optional<int> minWho = std::nullopt) {
    if (corpus.recipes.empty()) throw DataError("train_amounts: empty corpus");
    if (cfg.hiddenSize < 1 || !(cfg.batchFraction > 0.0) || cfg.batchFraction > 100.0)
        throw DataError("train_amounts: invalid config");

    std::vector<const Recipe*> pool;
    const bool hasSplits = corpus.hasSplits();
    for (std::size_t i = 0; i < corpus.recipes.size(); ++i) {
        if (hasSplits && corpus.splits[i] != Split::train) continue;
        const Recipe& r = corpus.recipes[i];
        if (minWho && who_score(recipe_nutrients(r, table)) <= *minWho) continue;
        pool.push_back(&r);
    }
    if (pool.empty())
        throw DataError(minWho ? "train_amounts: WHO filter left no training recipes"
                               : "train_amounts: empty training split");

    const std::size_t m = corpus.vocabularySize;
    const std::size_t h = cfg.hiddenSize;

    std::mt19937 rng(cfg.seed);
    AmountModel model;
    model.vocabHash = table.vocabHash;
    model.w1 = Matrix(m, h);
    model.b1.assign(h, 0.1);
    model.w2 = Matrix(h, m);
    model.b2.assign(m, 0.0);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(m + h));
    for (double& v : model.w1.data) v = draw_range(rng, -lim1, lim1);
    // The output layer starts at zero. Most target positions are 0 g (absent
    // ingredients), so a randomly initialized readout floods them with noise
    // and the cheapest descent direction under the absolute-error loss is to
    // drive every hidden unit negative, which stops all learning. From zero,
    // absent positions start loss-free and the readout only grows
    // presence-correlated channels. The small positive hidden bias keeps
    // units alive for every input at the start.

    std::size_t batchSize =
        static_cast<std::size_t>(std::llround(cfg.batchFraction / 100.0 * static_cast<double>(pool.size())));
    if (batchSize < 1) batchSize = 1;
    if (batchSize > pool.size()) batchSize = pool.size();

    AmountGradients grads;
    AmountGradients vel;  // momentum buffers
    if (cfg.momentum != 0.0) {
        vel.w1 = Matrix(m, h);
        vel.b1.assign(h, 0.0);
        vel.w2 = Matrix(h, m);
        vel.b2.assign(m, 0.0);
    }

    const double eta0 = cfg.learningRate;
    const double etaF = cfg.finalLearningRate ? std::min(*cfg.finalLearningRate, eta0) : eta0;

    std::vector<const Recipe*> order = pool;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double progress =
            cfg.epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1)
                           : 0.0;
        const double eta = eta0 + (etaF - eta0) * progress;
        shuffle_deterministic(std::span<const Recipe*>(order), rng);
        for (std::size_t start = 0; start < order.size(); start += batchSize) {
            const std::size_t count = std::min(batchSize, order.size() - start);
            mae_loss_and_gradients(model, {order.data() + start, count}, &grads);

            auto apply = [&](std::vector<double>& param, std::vector<double>& g,
                             std::vector<double>* v) {
                if (v) {
                    for (std::size_t i = 0; i < param.size(); ++i) {
                        (*v)[i] = cfg.momentum * (*v)[i] - eta * g[i];
                        param[i] += (*v)[i];
                    }
                } else {
                    for (std::size_t i = 0; i < param.size(); ++i)
                        param[i] -= eta * g[i];
                }
            };
            apply(model.w1.data, grads.w1.data, cfg.momentum != 0.0 ? &vel.w1.data : nullptr);
            apply(model.b1, grads.b1, cfg.momentum != 0.0 ? &vel.b1 : nullptr);
            apply(model.w2.data, grads.w2.data, cfg.momentum != 0.0 ? &vel.w2.data : nullptr);
            apply(model.b2, grads.b2, cfg.momentum != 0.0 ? &vel.b2 : nullptr);
        }
    }
    return model;
}

// Mean over recipes of the mean absolute gram error across all m positions
// (absent ingredients count as 0 g actual).
inline double eval_mae(const AmountModel& model, std::span<const Recipe* const> recipes) {
    if (recipes.empty()) throw DataError("eval_mae: no recipes");
    const std::size_t m = model.inputSize();
    double total = 0.0;
    std::vector<IngredientId> present;
    for (const Recipe* r : recipes) {
        present.clear();
        for (const auto& e : r->entries) present.push_back(e.ingredient);
        const std::vector<double> pred = predict_amounts(model, present);
        std::vector<double> actual(m, 0.0);
        for (const auto& e : r->entries) actual[e.ingredient] = e.grams;
        double err = 0.0;
        for (std::size_t j = 0; j < m; ++j) err += std::abs(pred[j] - actual[j]);
        total += err / static_cast<double>(m);
    }
    return total / static_cast<double>(recipes.size());
}

// --- model file (binary, tag NRA1) ---

inline void save_amounts(const std::string& path, const AmountModel& model) {
    ByteWriter w(path);
    w.bytes("NRA1", 4);
    w.u64(model.vocabHash);
    w.u32(static_cast<std::uint32_t>(model.inputSize()));
    w.u32(static_cast<std::uint32_t>(model.hiddenSize()));
    w.f64s(model.w1.data);
    w.f64s(model.b1);
    w.f64s(model.w2.data);
    w.f64s(model.b2);
    w.finish(path);
}

inline AmountModel load_amounts(const std::string& path) {
    ByteReader r(path);
    expect_tag(r, "NRA1");
    AmountModel model;
    model.vocabHash = r.u64();
    const std::uint32_t m = r.u32();
    const std::uint32_t h = r.u32();
    model.w1 = Matrix(m, h);
    model.w2 = Matrix(h, m);
    r.f64s(model.w1.data, static_cast<std::size_t>(m) * h);
    r.f64s(model.b1, h);
    r.f64s(model.w2.data, static_cast<std::size_t>(h) * m);
    r.f64s(model.b2, m);
    return model;
}

}  // namespace nutrec
