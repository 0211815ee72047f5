#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "nutrec/amounts.hpp"
#include "nutrec/corpus.hpp"
#include "nutrec/matrix.hpp"
#include "nutrec/rng.hpp"
#include "nutrec/types.hpp"

namespace nutrec {

// Symmetric co-appearance counts over training recipes; zero diagonal.
struct CooccurrenceGraph {
    std::size_t m = 0;
    std::vector<std::uint32_t> weights;  // m x m row-major

    std::uint32_t at(IngredientId i, IngredientId j) const { return weights[i * m + j]; }
};

inline CooccurrenceGraph build_cooccurrence_graph(const Corpus& corpus) {
    if (corpus.recipes.empty()) throw DataError("build_cooccurrence_graph: empty corpus");
    CooccurrenceGraph g;
    g.m = corpus.vocabularySize;
    g.weights.assign(g.m * g.m, 0);
    const bool hasSplits = corpus.hasSplits();
    for (std::size_t r = 0; r < corpus.recipes.size(); ++r) {
        if (hasSplits && corpus.splits[r] != Split::train) continue;
        const auto& entries = corpus.recipes[r].entries;
        for (std::size_t a = 0; a < entries.size(); ++a)
            for (std::size_t b = a + 1; b < entries.size(); ++b) {
                const IngredientId i = entries[a].ingredient;
                const IngredientId j = entries[b].ingredient;
                ++g.weights[i * g.m + j];
                ++g.weights[j * g.m + i];
            }
    }
    return g;
}

// Score is the summed edge weight toward the given set.
inline std::vector<ScoredIngredient> ipgraph_predict(const CooccurrenceGraph& graph,
                                                     std::span<const IngredientId> given,
                                                     std::size_t topN) {
    if (given.empty()) throw DataError("ipgraph_predict: empty ingredient set");
    const std::vector<IngredientId> g = canonical_set(given);
    std::vector<ScoredIngredient> scored;
    scored.reserve(graph.m);
    for (IngredientId i = 0; i < graph.m; ++i) {
        if (set_contains(g, i)) continue;
        double s = 0.0;
        for (IngredientId x : g) s += graph.at(i, x);
        scored.push_back({i, s});
    }
    sort_ranked(scored);
    if (scored.size() > topN) scored.resize(topN);
    return scored;
}

// Rank by the amount network's predicted grams.
inline std::vector<ScoredIngredient> ipmlp_predict(const AmountModel& model,
                                                   std::span<const IngredientId> given,
                                                   std::size_t topN) {
    if (given.empty()) throw DataError("ipmlp_predict: empty ingredient set");
    const std::vector<IngredientId> g = canonical_set(given);
    const std::vector<double> amounts = predict_amounts(model, g);
    std::vector<ScoredIngredient> scored;
    scored.reserve(amounts.size());
    for (IngredientId i = 0; i < amounts.size(); ++i) {
        if (set_contains(g, i)) continue;
        scored.push_back({i, amounts[i]});
    }
    sort_ranked(scored);
    if (scored.size() > topN) scored.resize(topN);
    return scored;
}

struct NmfFactors {
    Matrix w;  // u x c
    Matrix h;  // c x m
    std::size_t latentFactors() const { return w.cols; }
};

struct NmfResult {
    NmfFactors factors;
    std::vector<double> errorTrace;  // Frobenius error after each iteration
};

inline double frobenius_error(const Matrix& x, const Matrix& w, const Matrix& h) {
    double err = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t j = 0; j < x.cols; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < w.cols; ++k) v += w(r, k) * h(k, j);
            const double d = x(r, j) - v;
            err += d * d;
        }
    return std::sqrt(err);
}

// Lee-Seung multiplicative updates on ||X - WH||_F with seeded positive
// random init. Stops after `iterations` or when the relative error change
// drops below tol.
inline NmfResult nmf_factorize(const Matrix& x, std::size_t c, std::size_t iterations,
                               std::uint32_t seed, double tol = 1e-6) {
    const std::size_t u = x.rows;
    const std::size_t m = x.cols;
    if (c < 1 || c > std::min(u, m)) throw DataError("nmf_factorize: invalid factor count");

    constexpr double eps = 1e-12;
    std::mt19937 rng(seed);
    NmfResult res;
    res.factors.w = Matrix(u, c);
    res.factors.h = Matrix(c, m);
    for (double& v : res.factors.w.data) v = draw_range(rng, 0.0, 1.0) + 0.01;
    for (double& v : res.factors.h.data) v = draw_range(rng, 0.0, 1.0) + 0.01;

    Matrix& w = res.factors.w;
    Matrix& h = res.factors.h;
    double prev = frobenius_error(x, w, h);

    for (std::size_t it = 0; it < iterations; ++it) {
        // H <- H .* (W^T X) ./ (W^T W H)
        Matrix wtx(c, m), wtw(c, c);
        for (std::size_t k = 0; k < c; ++k)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < u; ++r) s += w(r, k) * x(r, j);
                wtx(k, j) = s;
            }
        for (std::size_t k = 0; k < c; ++k)
            for (std::size_t l = 0; l < c; ++l) {
                double s = 0.0;
                for (std::size_t r = 0; r < u; ++r) s += w(r, k) * w(r, l);
                wtw(k, l) = s;
            }
        for (std::size_t k = 0; k < c; ++k)
            for (std::size_t j = 0; j < m; ++j) {
                double denom = eps;
                for (std::size_t l = 0; l < c; ++l) denom += wtw(k, l) * h(l, j);
                h(k, j) *= wtx(k, j) / denom;
            }

        // W <- W .* (X H^T) ./ (W H H^T)
        Matrix xht(u, c), hht(c, c);
        for (std::size_t r = 0; r < u; ++r)
            for (std::size_t k = 0; k < c; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j) s += x(r, j) * h(k, j);
                xht(r, k) = s;
            }
        for (std::size_t k = 0; k < c; ++k)
            for (std::size_t l = 0; l < c; ++l) {
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j) s += h(k, j) * h(l, j);
                hht(k, l) = s;
            }
        for (std::size_t r = 0; r < u; ++r)
            for (std::size_t k = 0; k < c; ++k) {
                double denom = eps;
                for (std::size_t l = 0; l < c; ++l) denom += w(r, l) * hht(l, k);
                w(r, k) *= xht(r, k) / denom;
            }

        const double err = frobenius_error(x, w, h);
        res.errorTrace.push_back(err);
        if (prev > 0.0 && std::abs(prev - err) / prev < tol) break;
        prev = err;
    }
    return res;
}

// Binary recipe-ingredient matrix over the training split, row order = corpus order.
inline Matrix recipe_matrix(const Corpus& corpus) {
    const bool hasSplits = corpus.hasSplits();
    std::vector<const Recipe*> rows;
    for (std::size_t i = 0; i < corpus.recipes.size(); ++i)
        if (!hasSplits || corpus.splits[i] == Split::train) rows.push_back(&corpus.recipes[i]);
    Matrix x(rows.size(), corpus.vocabularySize);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const auto& e : rows[r]->entries) x(r, e.ingredient) = 1.0;
    return x;
}

// Lawson-Hanson nonnegative least squares: minimize ||x - wH|| over w >= 0.
// H is c x m, x length m, result length c. c is small (a handful of factors).
inline std::vector<double> nnls_fold_in(const Matrix& h, std::span<const double> x) {
    const std::size_t c = h.rows;
    const std::size_t m = h.cols;
    if (x.size() != m) throw DataError("nnls_fold_in: size mismatch");

    bool anyNonzero = false;
    for (double v : h.data)
        if (v != 0.0) anyNonzero = true;
    if (!anyNonzero) throw DataError("nnls_fold_in: zero factor basis");

    // normal-equation pieces: A = H H^T (c x c), b = H x (c)
    Matrix a(c, c);
    std::vector<double> b(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
        for (std::size_t l = 0; l < c; ++l) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += h(k, j) * h(l, j);
            a(k, l) = s;
        }
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += h(k, j) * x[j];
        b[k] = s;
    }

    auto solve_on = [&](const std::vector<bool>& active, std::vector<double>& z) -> bool {
        // Gaussian elimination restricted to the passive (non-active) set
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < c; ++k)
            if (!active[k]) idx.push_back(k);
        const std::size_t n = idx.size();
        z.assign(c, 0.0);
        if (n == 0) return true;
        Matrix sys(n, n + 1);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t col = 0; col < n; ++col) sys(r, col) = a(idx[r], idx[col]);
            sys(r, n) = b[idx[r]];
        }
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(sys(r, col)) > std::abs(sys(piv, col))) piv = r;
            if (std::abs(sys(piv, col)) < 1e-14) return false;
            if (piv != col)
                for (std::size_t cc = 0; cc <= n; ++cc) std::swap(sys(piv, cc), sys(col, cc));
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col) continue;
                const double f = sys(r, col) / sys(col, col);
                for (std::size_t cc = col; cc <= n; ++cc) sys(r, cc) -= f * sys(col, cc);
            }
        }
        for (std::size_t r = 0; r < n; ++r) z[idx[r]] = sys(r, n) / sys(r, r);
        return true;
    };

    std::vector<bool> active(c, true);  // all coefficients start clamped at zero
    std::vector<double> w(c, 0.0), z;
    constexpr double kTol = 1e-10;

    for (std::size_t outer = 0; outer < 3 * c + 10; ++outer) {
        // gradient of 0.5||x - wH||^2 is A w - b; pick the most negative component
        double best = -kTol;
        std::size_t bestK = c;
        for (std::size_t k = 0; k < c; ++k) {
            if (!active[k]) continue;
            double grad = -b[k];
            for (std::size_t l = 0; l < c; ++l) grad += a(k, l) * w[l];
            if (grad < best) {
                best = grad;
                bestK = k;
            }
        }
        if (bestK == c) break;  // KKT satisfied
        active[bestK] = false;

        while (true) {
            if (!solve_on(active, z)) {
                // singular passive set; drop the variable again and stop growing
                active[bestK] = true;
                solve_on(active, z);
                break;
            }
            bool feasible = true;
            for (std::size_t k = 0; k < c; ++k)
                if (!active[k] && z[k] <= 0.0) feasible = false;
            if (feasible) {
                w = z;
                break;
            }
            // step toward z until the first passive coefficient hits zero
            double alpha = 1.0;
            for (std::size_t k = 0; k < c; ++k) {
                if (active[k] || z[k] > 0.0) continue;
                const double denom = w[k] - z[k];
                if (denom > 0.0) alpha = std::min(alpha, w[k] / denom);
            }
            for (std::size_t k = 0; k < c; ++k)
                if (!active[k]) w[k] += alpha * (z[k] - w[k]);
            for (std::size_t k = 0; k < c; ++k)
                if (!active[k] && w[k] <= kTol) {
                    w[k] = 0.0;
                    active[k] = true;
                }
        }
    }
    return w;
}

// Fold the given set into the factor basis and rank candidates by wH.
inline std::vector<ScoredIngredient> ipnmf_predict(const NmfFactors& factors,
                                                   std::span<const IngredientId> given,
                                                   std::size_t topN) {
    if (given.empty()) throw DataError("ipnmf_predict: empty ingredient set");
    const std::vector<IngredientId> g = canonical_set(given);
    const std::size_t m = factors.h.cols;
    std::vector<double> x(m, 0.0);
    for (IngredientId id : g) {
        if (id >= m) throw DataError("ipnmf_predict: ingredient id out of range");
        x[id] = 1.0;
    }
    const std::vector<double> w = nnls_fold_in(factors.h, x);

    std::vector<ScoredIngredient> scored;
    scored.reserve(m);
    for (IngredientId j = 0; j < m; ++j) {
        if (set_contains(g, j)) continue;
        double s = 0.0;
        for (std::size_t k = 0; k < factors.h.rows; ++k) s += w[k] * factors.h(k, j);
        scored.push_back({j, s});
    }
    sort_ranked(scored);
    if (scored.size() > topN) scored.resize(topN);
    return scored;
}

inline IngredientRanker make_graph_ranker(const CooccurrenceGraph& graph) {
    return [&graph](std::span<const IngredientId> given, std::size_t topN) {
        return ipgraph_predict(graph, given, topN);
    };
}

inline IngredientRanker make_mlp_ranker(const AmountModel& model) {
    return [&model](std::span<const IngredientId> given, std::size_t topN) {
        return ipmlp_predict(model, given, topN);
    };
}

inline IngredientRanker make_nmf_ranker(const NmfFactors& factors) {
    return [&factors](std::span<const IngredientId> given, std::size_t topN) {
        return ipnmf_predict(factors, given, topN);
    };
}

}  // namespace nutrec
