#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nutrec/corpus.hpp"
#include "nutrec/matrix.hpp"
#include "nutrec/rng.hpp"
#include "nutrec/serialize.hpp"
#include "nutrec/types.hpp"

namespace nutrec {

// Ingredient embeddings. Each ingredient holds two d-dimensional vectors:
// a target row and a context row.
struct EmbeddingModel {
    Matrix target;   // m x d, rows v_i
    Matrix context;  // m x d, rows v'_i
    std::uint64_t vocabHash = 0;

    std::size_t vocabSize() const { return target.rows; }
    std::size_t dimension() const { return target.cols; }
};

struct EmbeddingTrainConfig {
    std::size_t dimension = 150;
    std::size_t negatives = 5;
    double learningRate = 0.025;
    double finalLearningRate = 1e-4;  // linear decay floor, clamped to learningRate
    double regularization = 1e-5;
    std::size_t epochs = 20;
    std::uint32_t seed = 42;
    bool frequencyWeightedNegatives = false;  // default: uniform over non-target ids
};

// Overflow-guarded sigmoid; output always in (0, 1).
inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(sigmoid(z)) without intermediate overflow.
inline double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

// Mean of the context rows over the given ingredient set.
inline std::vector<double> context_vector(const EmbeddingModel& model,
                                          std::span<const IngredientId> context) {
    if (context.empty()) throw DataError("context_vector: empty context");
    std::vector<double> c(model.dimension(), 0.0);
    for (IngredientId id : context) {
        const auto row = model.context.row(id);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += row[k];
    }
    const double inv = 1.0 / static_cast<double>(context.size());
    for (double& v : c) v *= inv;
    return c;
}

// Per-target log likelihood under negative sampling:
// log sigmoid(c.v_target) + sum over negatives of log sigmoid(-c.v_neg).
inline double negative_sampling_loss(const EmbeddingModel& model, IngredientId target,
                                     std::span<const IngredientId> context,
                                     std::span<const IngredientId> negatives) {
    for (IngredientId x : negatives)
        if (x == target) throw DataError("negative_sampling_loss: target among negatives");
    const std::vector<double> c = context_vector(model, context);
    double loss = log_sigmoid(dot(c, model.target.row(target)));
    for (IngredientId x : negatives)
        loss += log_sigmoid(-dot(c, model.target.row(x)));
    return loss;
}

// Analytic gradients of the regularized per-target objective
//   f = negative_sampling_loss - (lambda/2) (|v_a|^2 + sum |v_x|^2 + sum |v'_c|^2)
// with respect to v_a, each v_x, and each v'_c. The context rows pick up the
// 1/|context| chain factor from the context mean.
struct EmbeddingGradients {
    std::vector<double> target;                 // d
    std::vector<std::vector<double>> negatives; // per negative, d
    std::vector<std::vector<double>> context;   // per context member, d
};

inline EmbeddingGradients embedding_gradients(const EmbeddingModel& model, IngredientId target,
                                              std::span<const IngredientId> context,
                                              std::span<const IngredientId> negatives,
                                              double lambda) {
    const std::size_t d = model.dimension();
    const std::vector<double> c = context_vector(model, context);

    EmbeddingGradients g;
    g.target.assign(d, 0.0);
    const auto va = model.target.row(target);
    const double sa = sigmoid(dot(c, va));
    for (std::size_t k = 0; k < d; ++k)
        g.target[k] = (1.0 - sa) * c[k] - lambda * va[k];

    std::vector<double> dLdc(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) dLdc[k] = (1.0 - sa) * va[k];

    g.negatives.resize(negatives.size());
    for (std::size_t x = 0; x < negatives.size(); ++x) {
        const auto vx = model.target.row(negatives[x]);
        const double sx = sigmoid(dot(c, vx));
        g.negatives[x].assign(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            g.negatives[x][k] = -sx * c[k] - lambda * vx[k];
            dLdc[k] -= sx * vx[k];
        }
    }

    const double inv = 1.0 / static_cast<double>(context.size());
    g.context.resize(context.size());
    for (std::size_t t = 0; t < context.size(); ++t) {
        const auto vc = model.context.row(context[t]);
        g.context[t].assign(d, 0.0);
        for (std::size_t k = 0; k < d; ++k)
            g.context[t][k] = inv * dLdc[k] - lambda * vc[k];
    }
    return g;
}

namespace detail {

// Cumulative ingredient frequency over the training split, for the optional
// frequency-weighted negative sampler.
inline std::vector<double> frequency_cdf(const Corpus& corpus, std::size_t m) {
    std::vector<double> counts(m, 0.0);
    const bool hasSplits = corpus.hasSplits();
    for (std::size_t i = 0; i < corpus.recipes.size(); ++i) {
        if (hasSplits && corpus.splits[i] != Split::train) continue;
        for (const auto& e : corpus.recipes[i].entries) counts[e.ingredient] += 1.0;
    }
    double total = 0.0;
    for (double v : counts) total += v;
    std::vector<double> cdf(m, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += total > 0.0 ? counts[i] / total : 1.0 / static_cast<double>(m);
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    return cdf;
}

inline IngredientId draw_negative(std::mt19937& rng, std::uint32_t m, IngredientId exclude,
                                  const std::vector<double>* cdf) {
    while (true) {
        IngredientId cand;
        if (cdf) {
            const double u = draw_unit(rng);
            cand = static_cast<IngredientId>(
                std::lower_bound(cdf->begin(), cdf->end(), u) - cdf->begin());
            if (cand >= m) cand = m - 1;
        } else {
            cand = draw_below(rng, m);
        }
        if (cand != exclude) return cand;
    }
}

}  // namespace detail

// One ascent step on a single (context, target, negatives) example. All
// sigmoids and the context-row error term are evaluated on the pre-step
// vectors, then the three update rules fire:
//   v_a  += eta [ (1 - s(c.v_a)) c - lambda v_a ]
//   v_x  += eta [ -s(c.v_x) c - lambda v_x ]          for each negative x
//   v'_t += eta [ (1 - s(c.v_a)) v_a - sum_x s(c.v_x) v_x - lambda v'_t ]
inline void embedding_sgd_step(EmbeddingModel& model, std::span<const IngredientId> context,
                               IngredientId target, std::span<const IngredientId> negatives,
                               double eta, double lambda) {
    const std::size_t d = model.dimension();
    const std::vector<double> c = context_vector(model, context);

    std::vector<double> ctxGrad(d);
    const auto va = model.target.row(target);
    const double residual = 1.0 - sigmoid(dot(c, va));
    for (std::size_t k = 0; k < d; ++k) ctxGrad[k] = residual * va[k];

    std::vector<double> sx(negatives.size());
    for (std::size_t x = 0; x < negatives.size(); ++x) {
        const auto vx = model.target.row(negatives[x]);
        sx[x] = sigmoid(dot(c, vx));
        for (std::size_t k = 0; k < d; ++k) ctxGrad[k] -= sx[x] * vx[k];
    }

    auto vaMut = model.target.row(target);
    for (std::size_t k = 0; k < d; ++k)
        vaMut[k] += eta * (residual * c[k] - lambda * vaMut[k]);

    for (std::size_t x = 0; x < negatives.size(); ++x) {
        auto vx = model.target.row(negatives[x]);
        for (std::size_t k = 0; k < d; ++k) vx[k] += eta * (-sx[x] * c[k] - lambda * vx[k]);
    }

    for (IngredientId t : context) {
        auto vc = model.context.row(t);
        for (std::size_t k = 0; k < d; ++k) vc[k] += eta * (ctxGrad[k] - lambda * vc[k]);
    }
}

// Stochastic gradient ascent over the training split. For every recipe and
// every target position, the remaining ingredients form the context, N_e
// negatives are redrawn, and the three update rules are applied with the
// pre-step values on their right-hand sides. Deterministic for a fixed seed.
inline EmbeddingModel train_embedding(const Corpus& corpus, const EmbeddingTrainConfig& cfg,
                                      std::uint64_t vocabHash = 0) {
    if (corpus.recipes.empty()) throw DataError("train_embedding: empty corpus");
    if (cfg.dimension < 1 || cfg.negatives < 1 || !(cfg.learningRate >= 0.0) ||
        cfg.regularization < 0.0)
        throw DataError("train_embedding: invalid config");

    const auto m = static_cast<std::uint32_t>(corpus.vocabularySize);
    if (m < 2) throw DataError("train_embedding: need at least 2 ingredients");
    const std::size_t d = cfg.dimension;

    std::mt19937 rng(cfg.seed);
    EmbeddingModel model;
    model.vocabHash = vocabHash;
    model.target = Matrix(m, d);
    model.context = Matrix(m, d);  // zero-initialized
    const double initHalf = 0.5 / static_cast<double>(d);
    for (double& v : model.target.data) v = draw_range(rng, -initHalf, initHalf);

    std::vector<std::size_t> trainIdx;
    if (corpus.hasSplits())
        trainIdx = corpus.indicesOf(Split::train);
    else
        for (std::size_t i = 0; i < corpus.recipes.size(); ++i) trainIdx.push_back(i);
    if (trainIdx.empty()) throw DataError("train_embedding: empty training split");

    std::optional<std::vector<double>> cdf;
    if (cfg.frequencyWeightedNegatives) cdf = detail::frequency_cdf(corpus, m);

    std::size_t totalVisits = 0;
    for (std::size_t i : trainIdx) totalVisits += corpus.recipes[i].entries.size();
    totalVisits *= cfg.epochs;

    const double eta0 = cfg.learningRate;
    const double etaF = std::min(cfg.finalLearningRate, eta0);

    std::vector<IngredientId> ctxIds;
    std::vector<IngredientId> negatives(cfg.negatives);
    std::size_t visit = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t ri : trainIdx) {
            const Recipe& recipe = corpus.recipes[ri];
            const std::size_t nr = recipe.entries.size();
            for (std::size_t a = 0; a < nr; ++a) {
                const double progress =
                    totalVisits > 1 ? static_cast<double>(visit) / static_cast<double>(totalVisits - 1)
                                    : 0.0;
                const double eta = eta0 + (etaF - eta0) * progress;
                ++visit;

                const IngredientId ia = recipe.entries[a].ingredient;
                ctxIds.clear();
                for (std::size_t t = 0; t < nr; ++t)
                    if (t != a) ctxIds.push_back(recipe.entries[t].ingredient);

                for (std::size_t x = 0; x < cfg.negatives; ++x)
                    negatives[x] = detail::draw_negative(rng, m, ia, cdf ? &*cdf : nullptr);

                embedding_sgd_step(model, ctxIds, ia, negatives, eta, cfg.regularization);
            }
        }
    }
    return model;
}

// Dot-product scores of a raw context vector against every target row,
// excluding `excluded`; descending, ties by ascending id.
inline std::vector<ScoredIngredient> rank_by_dot(const EmbeddingModel& model,
                                                 std::span<const double> contextVec,
                                                 std::span<const IngredientId> excluded,
                                                 std::size_t topN) {
    const std::vector<IngredientId> ex = canonical_set(excluded);
    std::vector<ScoredIngredient> scored;
    scored.reserve(model.vocabSize());
    for (IngredientId i = 0; i < model.vocabSize(); ++i) {
        if (set_contains(ex, i)) continue;
        scored.push_back({i, dot(contextVec, model.target.row(i))});
    }
    sort_ranked(scored);
    if (scored.size() > topN) scored.resize(topN);
    return scored;
}

// Completion query: Pr(i | given) ~ c^T v_i over all candidates not given.
inline std::vector<ScoredIngredient> predict_missing(const EmbeddingModel& model,
                                                     std::span<const IngredientId> given,
                                                     std::size_t topN) {
    if (given.empty()) throw DataError("predict_missing: empty ingredient set");
    if (topN < 1) throw DataError("predict_missing: topN must be >= 1");
    const std::vector<double> c = context_vector(model, given);
    return rank_by_dot(model, c, given, topN);
}

// Cosine similarity over target rows; rows with zero norm score 0.
inline std::vector<ScoredIngredient> similar_ingredients(const EmbeddingModel& model,
                                                         IngredientId query, std::size_t topN) {
    if (query >= model.vocabSize()) throw DataError("similar_ingredients: invalid id");
    const auto q = model.target.row(query);
    const double qn = std::sqrt(dot(q, q));
    if (!(qn > 0.0)) throw DataError("similar_ingredients: zero-norm query vector");

    std::vector<ScoredIngredient> scored;
    scored.reserve(model.vocabSize());
    for (IngredientId i = 0; i < model.vocabSize(); ++i) {
        if (i == query) continue;
        const auto v = model.target.row(i);
        const double vn = std::sqrt(dot(v, v));
        scored.push_back({i, vn > 0.0 ? dot(q, v) / (qn * vn) : 0.0});
    }
    sort_ranked(scored);
    if (scored.size() > topN) scored.resize(topN);
    return scored;
}

// Full softmax of Eq-style scores over all ingredients; reference scorer for
// tests, never used in training.
inline std::vector<double> softmax_probabilities(const EmbeddingModel& model,
                                                 std::span<const IngredientId> context) {
    const std::vector<double> c = context_vector(model, context);
    std::vector<double> z(model.vocabSize());
    double zmax = -1e300;
    for (IngredientId i = 0; i < model.vocabSize(); ++i) {
        z[i] = dot(c, model.target.row(i));
        zmax = std::max(zmax, z[i]);
    }
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

inline IngredientRanker make_embedding_ranker(const EmbeddingModel& model) {
    return [&model](std::span<const IngredientId> given, std::size_t topN) {
        return predict_missing(model, given, topN);
    };
}

// --- model file (binary, tag NRE1) ---

inline void save_embedding(const std::string& path, const EmbeddingModel& model) {
    ByteWriter w(path);
    w.bytes("NRE1", 4);
    w.u64(model.vocabHash);
    w.u32(static_cast<std::uint32_t>(model.vocabSize()));
    w.u32(static_cast<std::uint32_t>(model.dimension()));
    w.f64s(model.target.data);
    w.f64s(model.context.data);
    w.finish(path);
}

inline EmbeddingModel load_embedding(const std::string& path) {
    ByteReader r(path);
    expect_tag(r, "NRE1");
    EmbeddingModel model;
    model.vocabHash = r.u64();
    const std::uint32_t m = r.u32();
    const std::uint32_t d = r.u32();
    model.target = Matrix(m, d);
    model.context = Matrix(m, d);
    r.f64s(model.target.data, static_cast<std::size_t>(m) * d);
    r.f64s(model.context.data, static_cast<std::size_t>(m) * d);
    return model;
}

}  // namespace nutrec
