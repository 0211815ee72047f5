#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nutrec/baselines.hpp"
#include "support/synthetic.hpp"

using namespace nutrec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Corpus three_recipe_corpus() {
    Corpus c;
    c.vocabularySize = 4;
    Recipe r0, r1, r2;
    r0.id = "r0";
    r0.entries = {{0, 10}, {1, 10}, {2, 10}};
    r1.id = "r1";
    r1.entries = {{0, 10}, {1, 10}};
    r2.id = "r2";
    r2.entries = {{2, 10}, {3, 10}};
    c.recipes = {r0, r1, r2};
    return c;
}

}  // namespace

TEST_CASE("co-occurrence counts are symmetric with a zero diagonal") {
    const Corpus c = three_recipe_corpus();
    const CooccurrenceGraph g = build_cooccurrence_graph(c);

    REQUIRE(g.m == 4);
    REQUIRE(g.at(0, 1) == 2);  // together in r0 and r1
    REQUIRE(g.at(1, 0) == 2);
    REQUIRE(g.at(0, 2) == 1);
    REQUIRE(g.at(1, 2) == 1);
    REQUIRE(g.at(2, 3) == 1);
    REQUIRE(g.at(0, 3) == 0);
    for (IngredientId i = 0; i < 4; ++i) REQUIRE(g.at(i, i) == 0);

    REQUIRE_THROWS_AS(build_cooccurrence_graph(Corpus{}), DataError);
}

TEST_CASE("co-occurrence counting ignores held-out recipes") {
    Corpus c = three_recipe_corpus();
    c.splits = {Split::train, Split::validation, Split::train};
    const CooccurrenceGraph g = build_cooccurrence_graph(c);
    REQUIRE(g.at(0, 1) == 1);  // r1 no longer counted
    REQUIRE(g.at(2, 3) == 1);
}

TEST_CASE("graph completion ranks by summed edge weight") {
    const Corpus c = three_recipe_corpus();
    const CooccurrenceGraph g = build_cooccurrence_graph(c);

    const auto fromZero = ipgraph_predict(g, std::vector<IngredientId>{0}, 10);
    REQUIRE(fromZero.size() == 3);
    REQUIRE(fromZero[0].id == 1);
    REQUIRE(fromZero[0].score == 2.0);
    REQUIRE(fromZero[1].id == 2);
    REQUIRE(fromZero[2].id == 3);
    REQUIRE(fromZero[2].score == 0.0);

    // all three candidates tie at weight 1; ids break the tie
    const auto fromTwo = ipgraph_predict(g, std::vector<IngredientId>{2}, 10);
    REQUIRE(fromTwo[0].id == 0);
    REQUIRE(fromTwo[1].id == 1);
    REQUIRE(fromTwo[2].id == 3);

    // a duplicated given id must not double-count edges
    const auto dup = ipgraph_predict(g, std::vector<IngredientId>{0, 0}, 10);
    REQUIRE(dup.size() == fromZero.size());
    for (std::size_t i = 0; i < dup.size(); ++i) {
        REQUIRE(dup[i].id == fromZero[i].id);
        REQUIRE(dup[i].score == fromZero[i].score);
    }

    REQUIRE_THROWS_AS(ipgraph_predict(g, std::vector<IngredientId>{}, 10), DataError);
    REQUIRE(ipgraph_predict(g, std::vector<IngredientId>{0}, 2).size() == 2);
}

TEST_CASE("amount-based completion ranks by predicted grams") {
    // bias-only model: prediction is b2 regardless of input
    AmountModel m;
    m.w1 = Matrix(5, 1);
    m.b1 = {0.0};
    m.w2 = Matrix(1, 5);
    m.b2 = {50.0, 10.0, 80.0, 10.0, 0.0};

    const auto out = ipmlp_predict(m, std::vector<IngredientId>{0}, 10);
    REQUIRE(out.size() == 4);
    REQUIRE(out[0].id == 2);   // 80 g
    REQUIRE(out[0].score == 80.0);
    REQUIRE(out[1].id == 1);   // 10 g, beats id 3 on the tie
    REQUIRE(out[2].id == 3);
    REQUIRE(out[3].id == 4);

    REQUIRE_THROWS_AS(ipmlp_predict(m, std::vector<IngredientId>{}, 10), DataError);
}

TEST_CASE("factorization recovers an exactly rank-1 matrix") {
    std::mt19937 rng(9);
    std::vector<double> u(6), v(5);
    for (double& a : u) a = draw_range(rng, 0.2, 1.0);
    for (double& a : v) a = draw_range(rng, 0.2, 1.0);
    Matrix x(6, 5);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 5; ++c) x(r, c) = u[r] * v[c];

    const NmfResult res = nmf_factorize(x, 1, 2000, 5);
    REQUIRE(res.errorTrace.back() < 1e-8);
    REQUIRE(res.factors.w.rows == 6);
    REQUIRE(res.factors.h.cols == 5);
    for (double w : res.factors.w.data) REQUIRE(w >= 0.0);
    for (double h : res.factors.h.data) REQUIRE(h >= 0.0);
}

TEST_CASE("factorization error is non-increasing and near the rank-1 optimum") {
    // For a nonnegative matrix the best rank-1 approximation is the leading
    // SVD pair (its singular vectors can be taken nonnegative), so a power
    // iteration gives an independent optimum to compare against.
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        std::mt19937 rng(seed);
        Matrix x(6, 5);
        for (double& v : x.data) v = draw_range(rng, 0.1, 1.0);

        double fro2 = 0.0;
        for (double v : x.data) fro2 += v * v;

        std::vector<double> y(5, 1.0);
        for (int it = 0; it < 1000; ++it) {
            std::vector<double> xy(6, 0.0);
            for (std::size_t r = 0; r < 6; ++r)
                for (std::size_t c = 0; c < 5; ++c) xy[r] += x(r, c) * y[c];
            std::vector<double> ny(5, 0.0);
            for (std::size_t r = 0; r < 6; ++r)
                for (std::size_t c = 0; c < 5; ++c) ny[c] += x(r, c) * xy[r];
            double n = 0.0;
            for (double v : ny) n += v * v;
            n = std::sqrt(n);
            for (double& v : ny) v /= n;
            y = ny;
        }
        std::vector<double> xy(6, 0.0);
        double sigma2 = 0.0;
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 5; ++c) xy[r] += x(r, c) * y[c];
        for (double v : xy) sigma2 += v * v;
        const double optimal = std::sqrt(std::max(0.0, fro2 - sigma2));

        const NmfResult res = nmf_factorize(x, 1, 2000, seed * 11);
        for (std::size_t i = 1; i < res.errorTrace.size(); ++i)
            REQUIRE(res.errorTrace[i] <= res.errorTrace[i - 1] * (1.0 + 1e-9));
        REQUIRE(res.errorTrace.back() <= optimal * 1.01);
    }
}

TEST_CASE("factorization rejects impossible factor counts") {
    Matrix x(4, 3);
    for (double& v : x.data) v = 1.0;
    REQUIRE_THROWS_AS(nmf_factorize(x, 0, 10, 1), DataError);
    REQUIRE_THROWS_AS(nmf_factorize(x, 4, 10, 1), DataError);
    REQUIRE(nmf_factorize(x, 3, 10, 1).factors.w.cols == 3);
}

TEST_CASE("recipe matrix is binary over the training split") {
    Corpus c = three_recipe_corpus();
    c.splits = {Split::train, Split::test, Split::train};
    const Matrix x = recipe_matrix(c);
    REQUIRE(x.rows == 2);  // r1 excluded
    REQUIRE(x.cols == 4);
    REQUIRE(x(0, 0) == 1.0);
    REQUIRE(x(0, 3) == 0.0);
    REQUIRE(x(1, 2) == 1.0);
    REQUIRE(x(1, 3) == 1.0);
    for (double v : x.data) REQUIRE((v == 0.0 || v == 1.0));
}

TEST_CASE("nonnegative least squares solves hand systems") {
    SECTION("interior solution") {
        // rows (1,1,0) and (0,1,1); x = row0 + row1 fits exactly
        Matrix h(2, 3);
        h(0, 0) = 1; h(0, 1) = 1;
        h(1, 1) = 1; h(1, 2) = 1;
        const std::vector<double> x{1.0, 2.0, 1.0};
        const std::vector<double> w = nnls_fold_in(h, x);
        REQUIRE_THAT(w[0], WithinAbs(1.0, 1e-10));
        REQUIRE_THAT(w[1], WithinAbs(1.0, 1e-10));
    }
    SECTION("active constraint clamps a negative coefficient") {
        // unconstrained solution is (2/3, -1/3); NNLS clamps the second
        // coordinate and solves the rest: w = (0.5, 0)
        Matrix h(2, 3);
        h(0, 0) = 1; h(0, 1) = 1;
        h(1, 1) = 1; h(1, 2) = 1;
        const std::vector<double> x{1.0, 0.0, 0.0};
        const std::vector<double> w = nnls_fold_in(h, x);
        REQUIRE_THAT(w[0], WithinAbs(0.5, 1e-10));
        REQUIRE(w[1] == 0.0);
    }
    SECTION("single factor has a closed form") {
        std::mt19937 rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            Matrix h(1, 4);
            for (double& v : h.data) v = draw_range(rng, -1.0, 1.0);
            bool allZero = true;
            for (double v : h.data) allZero = allZero && v == 0.0;
            if (allZero) continue;
            std::vector<double> x(4);
            for (double& v : x) v = draw_range(rng, -2.0, 2.0);

            const double hx = dot(std::span<const double>(h.data), std::span<const double>(x));
            const double hh = dot(std::span<const double>(h.data), std::span<const double>(h.data));
            const double expected = std::max(0.0, hx / hh);
            const std::vector<double> w = nnls_fold_in(h, x);
            REQUIRE_THAT(w[0], WithinAbs(expected, 1e-10));
        }
    }
    SECTION("residual never exceeds the trivial zero solution") {
        std::mt19937 rng(23);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t c = 1 + draw_below(rng, 4), m = 6;
            Matrix h(c, m);
            for (double& v : h.data) v = draw_range(rng, 0.0, 1.0);
            std::vector<double> x(m);
            for (double& v : x) v = draw_range(rng, 0.0, 1.0);

            const std::vector<double> w = nnls_fold_in(h, x);
            double res2 = 0.0, x2 = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                double fit = 0.0;
                for (std::size_t k = 0; k < c; ++k) fit += w[k] * h(k, j);
                res2 += (x[j] - fit) * (x[j] - fit);
                x2 += x[j] * x[j];
            }
            for (double v : w) REQUIRE(v >= 0.0);
            REQUIRE(res2 <= x2 * (1.0 + 1e-9));
        }
    }
    SECTION("degenerate inputs") {
        Matrix zero(2, 3);
        REQUIRE_THROWS_AS(nnls_fold_in(zero, std::vector<double>{1, 2, 3}), DataError);
        Matrix h(2, 3);
        h(0, 0) = 1;
        REQUIRE_THROWS_AS(nnls_fold_in(h, std::vector<double>{1, 2}), DataError);
    }
}

TEST_CASE("factor completion stays inside the ingredient community") {
    // two disjoint communities; the fold-in must pick the missing community
    // member, never the other block
    Corpus c;
    c.vocabularySize = 6;
    int id = 0;
    auto add = [&](std::vector<IngredientId> ids) {
        Recipe r;
        r.id = "r" + std::to_string(id++);
        for (IngredientId i : ids) r.entries.push_back({i, 10.0});
        c.recipes.push_back(r);
    };
    add({0, 1, 2});
    add({0, 1});
    add({1, 2});
    add({0, 2});
    add({3, 4, 5});
    add({3, 4});
    add({4, 5});
    add({3, 5});

    const Matrix x = recipe_matrix(c);
    const NmfResult res = nmf_factorize(x, 2, 500, 3);
    const auto out = ipnmf_predict(res.factors, std::vector<IngredientId>{0, 1}, 6);

    REQUIRE(out.size() == 4);
    REQUIRE(out[0].id == 2);
    REQUIRE(out[0].score > out[1].score);

    REQUIRE_THROWS_AS(ipnmf_predict(res.factors, std::vector<IngredientId>{}, 3), DataError);
    REQUIRE_THROWS_AS(ipnmf_predict(res.factors, std::vector<IngredientId>{0, 99}, 3), DataError);
}

TEST_CASE("ranker adapters forward to their predictors") {
    const Corpus c = three_recipe_corpus();
    const CooccurrenceGraph g = build_cooccurrence_graph(c);
    const IngredientRanker ranker = make_graph_ranker(g);

    const auto viaRanker = ranker(std::vector<IngredientId>{0}, 2);
    const auto direct = ipgraph_predict(g, std::vector<IngredientId>{0}, 2);
    REQUIRE(viaRanker.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        REQUIRE(viaRanker[i].id == direct[i].id);
        REQUIRE(viaRanker[i].score == direct[i].score);
    }
}
