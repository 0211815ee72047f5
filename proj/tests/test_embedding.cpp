#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include "nutrec/embedding.hpp"
#include "support/paths.hpp"
#include "support/synthetic.hpp"

using namespace nutrec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// m=3, d=2 fixture with hand-picked vectors. Oracle numbers below were
// computed independently at 40-digit precision and frozen.
EmbeddingModel tiny_model() {
    EmbeddingModel m;
    m.target = Matrix(3, 2);
    m.context = Matrix(3, 2);
    m.target(0, 0) = 0.7;
    m.target(0, 1) = -0.1;
    m.target(1, 0) = -0.3;
    m.target(1, 1) = 0.2;
    m.target(2, 0) = 0.05;
    m.target(2, 1) = 0.4;
    m.context(0, 0) = 0.1;
    m.context(0, 1) = -0.2;
    m.context(1, 0) = 0.3;
    m.context(1, 1) = 0.4;
    m.context(2, 0) = -0.5;
    m.context(2, 1) = 0.6;
    return m;
}

double objective(const EmbeddingModel& m, IngredientId target,
                 std::span<const IngredientId> context,
                 std::span<const IngredientId> negatives, double lambda) {
    double penalty = dot(m.target.row(target), m.target.row(target));
    for (IngredientId x : negatives) penalty += dot(m.target.row(x), m.target.row(x));
    for (IngredientId t : context) penalty += dot(m.context.row(t), m.context.row(t));
    return negative_sampling_loss(m, target, context, negatives) - 0.5 * lambda * penalty;
}

}  // namespace

TEST_CASE("context vector is the mean of the context rows") {
    const EmbeddingModel m = tiny_model();
    const std::vector<IngredientId> ctx{1, 2};
    const std::vector<double> c = context_vector(m, ctx);
    REQUIRE_THAT(c[0], WithinRel(-0.1, 1e-15));
    REQUIRE_THAT(c[1], WithinRel(0.5, 1e-15));
    REQUIRE_THROWS_AS(context_vector(m, std::vector<IngredientId>{}), DataError);
}

TEST_CASE("negative sampling loss matches the frozen hand value") {
    const EmbeddingModel m = tiny_model();
    const std::vector<IngredientId> ctx{1, 2}, negs{1, 2};
    const double loss = negative_sampling_loss(m, 0, ctx, negs);
    REQUIRE_THAT(loss, WithinRel(-2.3105970901403120, 1e-14));

    REQUIRE_THROWS_AS(negative_sampling_loss(m, 1, ctx, negs), DataError);
}

TEST_CASE("sigmoid helpers stay finite at extreme arguments") {
    REQUIRE_THAT(sigmoid(0.0), WithinRel(0.5, 1e-15));
    REQUIRE(sigmoid(800.0) <= 1.0);
    REQUIRE(sigmoid(800.0) > 0.999);
    REQUIRE(sigmoid(-800.0) >= 0.0);
    REQUIRE(std::isfinite(log_sigmoid(-800.0)));
    REQUIRE_THAT(log_sigmoid(-800.0), WithinRel(-800.0, 1e-10));
    REQUIRE_THAT(log_sigmoid(0.0), WithinRel(std::log(0.5), 1e-14));
}

TEST_CASE("one SGD step reproduces the frozen update") {
    EmbeddingModel m = tiny_model();
    const std::vector<IngredientId> ctx{1, 2}, negs{1, 2};
    embedding_sgd_step(m, ctx, 0, negs, 0.1, 0.01);

    REQUIRE_THAT(m.target(0, 0), WithinRel(0.69400035948235428, 1e-14));
    REQUIRE_THAT(m.target(0, 1), WithinRel(-0.073401797411771412, 1e-14));
    REQUIRE_THAT(m.target(1, 0), WithinRel(-0.29437545693612681, 1e-14));
    REQUIRE_THAT(m.target(1, 1), WithinRel(0.17317728468063406, 1e-14));
    REQUIRE_THAT(m.target(2, 0), WithinRel(0.055435961085831343, 1e-14));
    REQUIRE_THAT(m.target(2, 1), WithinRel(0.37217019457084328, 1e-14));

    REQUIRE_THAT(m.context(1, 0), WithinRel(0.35002813227222391, 1e-14));
    REQUIRE_THAT(m.context(1, 1), WithinRel(0.36170742901128253, 1e-14));
    REQUIRE_THAT(m.context(2, 0), WithinRel(-0.44917186772777609, 1e-14));
    REQUIRE_THAT(m.context(2, 1), WithinRel(0.56150742901128253, 1e-14));

    // the target id's own context row is not part of the step
    REQUIRE(m.context(0, 0) == 0.1);
    REQUIRE(m.context(0, 1) == -0.2);
}

TEST_CASE("analytic gradients agree with central differences") {
    std::mt19937 rng(2024);
    const double lambda = 1e-3;
    const double h = 1e-6;

    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t m = 4 + trial, d = 3;
        EmbeddingModel model;
        model.target = Matrix(m, d);
        model.context = Matrix(m, d);
        for (double& v : model.target.data) v = draw_range(rng, -0.8, 0.8);
        for (double& v : model.context.data) v = draw_range(rng, -0.8, 0.8);

        const IngredientId target = draw_below(rng, static_cast<std::uint32_t>(m));
        std::vector<IngredientId> ctx, negs;
        for (IngredientId i = 0; i < m; ++i)
            if (i != target && ctx.size() < 2) ctx.push_back(i);
        for (IngredientId i = 0; i < m; ++i)
            if (i != target && negs.size() < 2) negs.push_back(i);

        const EmbeddingGradients g = embedding_gradients(model, target, ctx, negs, lambda);

        auto check = [&](Matrix& mat, std::size_t row, std::size_t k, double analytic) {
            const double orig = mat(row, k);
            mat(row, k) = orig + h;
            const double fp = objective(model, target, ctx, negs, lambda);
            mat(row, k) = orig - h;
            const double fm = objective(model, target, ctx, negs, lambda);
            mat(row, k) = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
            REQUIRE(std::abs(fd - analytic) / denom < 1e-4);
        };

        for (std::size_t k = 0; k < d; ++k) check(model.target, target, k, g.target[k]);
        for (std::size_t x = 0; x < negs.size(); ++x)
            for (std::size_t k = 0; k < d; ++k)
                check(model.target, negs[x], k, g.negatives[x][k]);
        for (std::size_t t = 0; t < ctx.size(); ++t)
            for (std::size_t k = 0; k < d; ++k)
                check(model.context, ctx[t], k, g.context[t][k]);
    }
}

TEST_CASE("zero learning rate leaves the initialization untouched") {
    auto synth = testsupport::make_synthetic({.recipes = 30, .split = false});
    EmbeddingTrainConfig cfg;
    cfg.dimension = 4;
    cfg.epochs = 3;
    cfg.learningRate = 0.0;
    cfg.finalLearningRate = 0.0;
    const EmbeddingModel a = train_embedding(synth.corpus, cfg);

    cfg.epochs = 1;
    const EmbeddingModel b = train_embedding(synth.corpus, cfg);

    REQUIRE(a.target.data == b.target.data);
    REQUIRE(a.context.data == b.context.data);
    for (double v : a.context.data) REQUIRE(v == 0.0);
}

TEST_CASE("training raises the sampled objective") {
    auto synth = testsupport::make_synthetic({.recipes = 80, .split = false});

    EmbeddingTrainConfig cfg;
    cfg.dimension = 16;
    cfg.learningRate = 0.05;
    cfg.seed = 3;

    cfg.epochs = 1;
    const EmbeddingModel m1 = train_embedding(synth.corpus, cfg);
    cfg.epochs = 20;
    const EmbeddingModel m20 = train_embedding(synth.corpus, cfg);

    // same fixed negatives for both models
    auto mean_loss = [&](const EmbeddingModel& m) {
        std::mt19937 rng(99);
        double sum = 0.0;
        std::size_t n = 0;
        for (const Recipe& r : synth.corpus.recipes) {
            const std::vector<IngredientId> ids = r.ingredientIds();
            for (std::size_t a = 0; a < ids.size(); ++a) {
                std::vector<IngredientId> ctx;
                for (std::size_t t = 0; t < ids.size(); ++t)
                    if (t != a) ctx.push_back(ids[t]);
                std::vector<IngredientId> negs;
                while (negs.size() < 5) {
                    const IngredientId x =
                        draw_below(rng, static_cast<std::uint32_t>(synth.corpus.vocabularySize));
                    if (x != ids[a]) negs.push_back(x);
                }
                sum += negative_sampling_loss(m, ids[a], ctx, negs);
                ++n;
            }
        }
        return sum / static_cast<double>(n);
    };

    REQUIRE(mean_loss(m20) > mean_loss(m1));
}

TEST_CASE("training rejects degenerate configs") {
    auto synth = testsupport::make_synthetic({.recipes = 20, .split = false});
    EmbeddingTrainConfig cfg;
    cfg.dimension = 0;
    REQUIRE_THROWS_AS(train_embedding(synth.corpus, cfg), DataError);
    cfg = {};
    cfg.negatives = 0;
    REQUIRE_THROWS_AS(train_embedding(synth.corpus, cfg), DataError);
    REQUIRE_THROWS_AS(train_embedding(Corpus{}, EmbeddingTrainConfig{}), DataError);
}

TEST_CASE("dot-product ranking orders by score with id tiebreak") {
    EmbeddingModel m;
    m.target = Matrix(4, 2);
    m.context = Matrix(4, 2);
    m.target(0, 0) = 2.0;  // score 2 against c=(1,0)
    m.target(1, 0) = 1.0;  // score 1
    m.target(2, 0) = 1.0;  // score 1, loses the tie to id 1
    m.target(3, 0) = 3.0;  // score 3
    const std::vector<double> c{1.0, 0.0};

    const auto ranked = rank_by_dot(m, c, std::vector<IngredientId>{}, 10);
    REQUIRE(ranked.size() == 4);
    REQUIRE(ranked[0].id == 3);
    REQUIRE(ranked[1].id == 0);
    REQUIRE(ranked[2].id == 1);
    REQUIRE(ranked[3].id == 2);

    const std::vector<IngredientId> excluded{3};
    const auto withoutTop = rank_by_dot(m, c, excluded, 2);
    REQUIRE(withoutTop.size() == 2);
    REQUIRE(withoutTop[0].id == 0);
    REQUIRE(withoutTop[1].id == 1);
}

TEST_CASE("completion never suggests a given ingredient") {
    auto synth = testsupport::make_synthetic({.recipes = 60, .split = false});
    EmbeddingTrainConfig cfg;
    cfg.dimension = 8;
    cfg.epochs = 5;
    const EmbeddingModel m = train_embedding(synth.corpus, cfg);

    const std::vector<IngredientId> given{0, 1, 5};
    const auto out = predict_missing(m, given, synth.corpus.vocabularySize);
    REQUIRE(out.size() == synth.corpus.vocabularySize - given.size());
    for (const auto& s : out)
        for (IngredientId g : given) REQUIRE(s.id != g);
    for (std::size_t i = 1; i < out.size(); ++i) REQUIRE(out[i - 1].score >= out[i].score);

    REQUIRE(predict_missing(m, given, 3).size() == 3);
    REQUIRE_THROWS_AS(predict_missing(m, std::vector<IngredientId>{}, 5), DataError);
    REQUIRE_THROWS_AS(predict_missing(m, given, 0), DataError);

    const IngredientRanker ranker = make_embedding_ranker(m);
    const auto viaRanker = ranker(given, 3);
    const auto direct = predict_missing(m, given, 3);
    REQUIRE(viaRanker.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        REQUIRE(viaRanker[i].id == direct[i].id);
        REQUIRE(viaRanker[i].score == direct[i].score);
    }
}

TEST_CASE("nearest neighbours use cosine over target rows") {
    EmbeddingModel m;
    m.target = Matrix(4, 2);
    m.context = Matrix(4, 2);
    m.target(0, 0) = 1.0;                         // query
    m.target(1, 0) = 5.0;                         // same direction, cos 1
    m.target(2, 0) = 1.0; m.target(2, 1) = 1.0;   // cos 1/sqrt(2)
    // row 3 stays zero: cos defined as 0

    const auto nn = similar_ingredients(m, 0, 4);
    REQUIRE(nn.size() == 3);
    REQUIRE(nn[0].id == 1);
    REQUIRE_THAT(nn[0].score, WithinRel(1.0, 1e-12));
    REQUIRE(nn[1].id == 2);
    REQUIRE_THAT(nn[1].score, WithinRel(1.0 / std::sqrt(2.0), 1e-12));
    REQUIRE(nn[2].id == 3);
    REQUIRE(nn[2].score == 0.0);

    REQUIRE_THROWS_AS(similar_ingredients(m, 3, 2), DataError);  // zero-norm query
    REQUIRE_THROWS_AS(similar_ingredients(m, 9, 2), DataError);
}

TEST_CASE("softmax probabilities are a proper distribution over the vocabulary") {
    const EmbeddingModel m = tiny_model();
    const std::vector<IngredientId> ctx{1, 2};
    const std::vector<double> p = softmax_probabilities(m, ctx);
    REQUIRE(p.size() == 3);
    double sum = 0.0;
    for (double v : p) {
        REQUIRE(v > 0.0);
        sum += v;
    }
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));

    // highest probability goes to the largest dot product (id 2 here)
    REQUIRE(p[2] > p[0]);
    REQUIRE(p[2] > p[1]);
}

TEST_CASE("embedding files round-trip and refuse foreign formats") {
    auto synth = testsupport::make_synthetic({.recipes = 30, .split = false});
    EmbeddingTrainConfig cfg;
    cfg.dimension = 6;
    cfg.epochs = 2;
    const EmbeddingModel m = train_embedding(synth.corpus, cfg, synth.table.vocabHash);

    const std::string p = testsupport::temp_path("embedding_roundtrip.bin");
    save_embedding(p, m);
    const EmbeddingModel back = load_embedding(p);
    REQUIRE(back.vocabHash == synth.table.vocabHash);
    REQUIRE(back.target.rows == m.target.rows);
    REQUIRE(back.target.cols == m.target.cols);
    REQUIRE(back.target.data == m.target.data);
    REQUIRE(back.context.data == m.context.data);

    const std::string q = testsupport::temp_path("embedding_wrongtag.bin");
    testsupport::write_text(q, "NRA1abcdefgh");
    REQUIRE_THROWS_AS(load_embedding(q), DataError);
}

TEST_CASE("same seed, same model; different seed, different model") {
    auto synth = testsupport::make_synthetic({.recipes = 40, .split = false});
    EmbeddingTrainConfig cfg;
    cfg.dimension = 8;
    cfg.epochs = 3;

    const EmbeddingModel a = train_embedding(synth.corpus, cfg);
    const EmbeddingModel b = train_embedding(synth.corpus, cfg);
    REQUIRE(a.target.data == b.target.data);
    REQUIRE(a.context.data == b.context.data);

    cfg.seed = 43;
    const EmbeddingModel c = train_embedding(synth.corpus, cfg);
    REQUIRE(a.target.data != c.target.data);

    cfg.seed = 42;
    cfg.frequencyWeightedNegatives = true;
    const EmbeddingModel d = train_embedding(synth.corpus, cfg);
    REQUIRE(a.target.data != d.target.data);  // different negative draws
}
