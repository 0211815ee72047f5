#pragma once

#include <cctype>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nutrec/baselines.hpp"
#include "nutrec/corpus.hpp"
#include "nutrec/embedding.hpp"
#include "nutrec/eval.hpp"
#include "nutrec/recommender.hpp"

namespace nutrec {
namespace cli {

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

// A predictor plus whatever model it ranks with; the lambda shares ownership
// so the ranker stays valid after this struct is copied around.
struct Predictor {
    std::string name;
    IngredientRanker ranker;
};

struct PredictorSources {
    std::string embeddingPath;
    std::string amountsPath;
    std::size_t nmfFactors = 50;
    std::size_t nmfIterations = 100;
    std::uint32_t seed = 42;
};

inline Predictor make_predictor(const std::string& name, const Corpus& corpus,
                                const NutrientTable& table, const PredictorSources& src) {
    Predictor p;
    p.name = name;
    if (name == "embedding") {
        if (src.embeddingPath.empty())
            throw DataError("predictor 'embedding' requires --embedding-model");
        auto model = std::make_shared<EmbeddingModel>(load_embedding(src.embeddingPath));
        check_vocab_hash(model->vocabHash, table.vocabHash, "embedding model");
        p.ranker = [model](std::span<const IngredientId> given, std::size_t topN) {
            return predict_missing(*model, given, topN);
        };
    } else if (name == "mlp") {
        if (src.amountsPath.empty()) throw DataError("predictor 'mlp' requires --amounts-model");
        auto model = std::make_shared<AmountModel>(load_amounts(src.amountsPath));
        check_vocab_hash(model->vocabHash, table.vocabHash, "amount model");
        p.ranker = [model](std::span<const IngredientId> given, std::size_t topN) {
            return ipmlp_predict(*model, given, topN);
        };
    } else if (name == "graph") {
        auto graph = std::make_shared<CooccurrenceGraph>(build_cooccurrence_graph(corpus));
        p.ranker = [graph](std::span<const IngredientId> given, std::size_t topN) {
            return ipgraph_predict(*graph, given, topN);
        };
    } else if (name == "nmf") {
        const Matrix x = recipe_matrix(corpus);
        auto factors = std::make_shared<NmfFactors>(
            nmf_factorize(x, src.nmfFactors, src.nmfIterations, src.seed).factors);
        p.ranker = [factors](std::span<const IngredientId> given, std::size_t topN) {
            return ipnmf_predict(*factors, given, topN);
        };
    } else {
        throw DataError("unknown predictor '" + name +
                        "' (expected embedding, graph, mlp, or nmf)");
    }
    return p;
}

inline std::vector<IngredientId> parse_ingredient_list(const std::string& csv,
                                                       const NutrientTable& table) {
    std::vector<IngredientId> ids;
    std::stringstream ss(csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
        const std::string t = detail::trim(name);
        if (t.empty()) continue;
        const auto it = table.index.find(t);
        if (it == table.index.end()) throw DataError("unknown ingredient: '" + t + "'");
        ids.push_back(it->second);
    }
    if (ids.empty()) throw DataError("no ingredients given");
    return ids;
}

inline nlohmann::json nutrients_json(const NutrientVector& nv) {
    return {
        {"protein", nv.protein},       {"carbohydrates", nv.carbohydrates},
        {"sugars", nv.sugars},         {"fat", nv.fat},
        {"saturatedFat", nv.saturatedFat}, {"sodium", nv.sodium},
        {"fiber", nv.fiber},           {"energy", nv.energy},
    };
}

inline nlohmann::json who_report_json(const WhoReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const WhoRow& r : report.rows)
        rows.push_back({{"predictor", r.predictor},
                        {"cosWeight", r.cosWeight},
                        {"meanWho", r.meanWho}});
    return {{"baselineMeanWho", report.baselineMeanWho},
            {"seedSets", report.seedSets},
            {"seedsFlaggedShort", report.seedsFlaggedShort},
            {"rows", rows}};
}

// CLI11 only reads config files registered on the root app, so subcommand
// `--config FILE` arguments are expanded here before parsing: every key in
// the file becomes a trailing long option unless the command line already
// carries it, which is what makes explicit flags win.
inline std::vector<std::string> apply_config_files(const std::vector<std::string>& args,
                                                   const CLI::App& app) {
    if (args.empty()) return args;
    std::vector<std::string> out{args[0]};
    std::vector<std::string> files;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw DataError("--config needs a file path");
            files.push_back(args[++i]);
        } else if (a.rfind("--config=", 0) == 0) {
            files.push_back(a.substr(9));
        } else {
            out.push_back(a);
        }
    }
    if (files.empty()) return out;

    const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
    if (sub == nullptr) return out;

    const auto given = [&out](const std::string& opt) {
        for (std::size_t i = 1; i < out.size(); ++i)
            if (out[i] == opt || out[i].rfind(opt + "=", 0) == 0) return true;
        return false;
    };

    for (const std::string& file : files) {
        std::vector<CLI::ConfigItem> items;
        try {
            items = CLI::ConfigINI().from_file(file);
        } catch (const CLI::FileError&) {
            throw DataError("cannot open config file: " + file);
        }
        for (const CLI::ConfigItem& item : items) {
            if (!item.parents.empty())
                throw DataError("config file " + file + ": sections are not supported (key '" +
                                item.fullname() + "')");
            const std::string opt = "--" + item.name;
            const CLI::Option* op = sub->get_option_no_throw(opt);
            if (op == nullptr)
                throw DataError("config file " + file + ": unknown option '" + item.name + "'");
            if (given(opt)) continue;
            if (op->get_expected_max() == 0) {
                std::string v = item.inputs.size() == 1 ? item.inputs[0] : "true";
                for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                if (v == "true" || v == "1" || v == "yes" || v == "on")
                    out.push_back(opt);
                else if (v != "false" && v != "0" && v != "no" && v != "off")
                    throw DataError("config file " + file + ": flag '" + item.name +
                                    "' wants true or false, got '" + item.inputs[0] + "'");
                continue;
            }
            out.push_back(opt);
            for (const std::string& in : item.inputs) out.push_back(in);
        }
    }
    return out;
}

}  // namespace cli

// Entry point shared by the binary and the tests. `args` is everything after
// the program name. Returns the process exit code: 0 success, 1 usage error,
// 2 bad data, 3 model/corpus mismatch.
inline int run_command(const std::vector<std::string>& args) {
    CLI::App app{"nutrec: nutrition-aware recipe recommendation"};
    app.require_subcommand(1);
    std::string configSink;
    const char* configHelp = "INI config file; keys are long option names, command line wins";

    // ingest
    struct {
        std::string recipes, nutrients, out;
        std::uint32_t seed = 42;
        bool noSplit = false;
    } ing;
    auto* ingest = app.add_subcommand("ingest", "Build a binary corpus cache from raw files");
    ingest->add_option("--config", configSink, configHelp);
    ingest->add_option("--recipes", ing.recipes, "Recipe JSONL file")->required();
    ingest->add_option("--nutrients", ing.nutrients, "Nutrient CSV file")->required();
    ingest->add_option("--out", ing.out, "Output corpus cache")->required();
    ingest->add_option("--seed", ing.seed, "Split shuffle seed");
    ingest->add_flag("--no-split", ing.noSplit, "Skip the train/validation/test split");
    ingest->callback([&ing]() {
        const NutrientTable table = load_nutrient_table(ing.nutrients);
        Corpus corpus = load_recipes(ing.recipes, table);
        if (!ing.noSplit) corpus = split_corpus(corpus, ing.seed);
        save_corpus_cache(ing.out, table, corpus);
        std::cout << "ingredients: " << table.size() << "\n"
                  << "recipes: " << corpus.recipes.size() << "\n"
                  << "dropped recipes: " << corpus.stats.droppedRecipes << "\n"
                  << "skipped entries: " << corpus.stats.skippedEntries << "\n";
        if (corpus.hasSplits())
            std::cout << "split: " << corpus.indicesOf(Split::train).size() << " train, "
                      << corpus.indicesOf(Split::validation).size() << " validation, "
                      << corpus.indicesOf(Split::test).size() << " test\n";
        std::cout << "wrote " << ing.out << "\n";
    });

    // train-embedding
    struct {
        std::string corpus, out;
        EmbeddingTrainConfig cfg;
    } te;
    auto* trainEmb = app.add_subcommand("train-embedding", "Train the ingredient embedding");
    trainEmb->add_option("--config", configSink, configHelp);
    trainEmb->add_option("--corpus", te.corpus, "Corpus cache")->required();
    trainEmb->add_option("--out", te.out, "Output model file")->required();
    trainEmb->add_option("--dimension", te.cfg.dimension, "Embedding dimension");
    trainEmb->add_option("--negatives", te.cfg.negatives, "Negative samples per step");
    trainEmb->add_option("--learning-rate", te.cfg.learningRate, "Initial learning rate");
    trainEmb->add_option("--final-learning-rate", te.cfg.finalLearningRate,
                         "Learning rate at the end of training");
    trainEmb->add_option("--lambda", te.cfg.regularization, "L2 regularization strength");
    trainEmb->add_option("--epochs", te.cfg.epochs, "Training epochs");
    trainEmb->add_option("--seed", te.cfg.seed, "RNG seed");
    trainEmb->add_flag("--freq-negatives", te.cfg.frequencyWeightedNegatives,
                       "Sample negatives by ingredient frequency");
    trainEmb->callback([&te]() {
        const auto [table, corpus] = load_corpus_cache(te.corpus);
        const EmbeddingModel model = train_embedding(corpus, te.cfg, table.vocabHash);
        save_embedding(te.out, model);
        std::cout << "trained embedding (" << corpus.vocabularySize << " x "
                  << te.cfg.dimension << "), wrote " << te.out << "\n";
    });

    // train-amounts
    struct {
        std::string corpus, out;
        AmountTrainConfig cfg;
        int minWho = 0;
    } ta;
    auto* trainAm = app.add_subcommand("train-amounts", "Train the amount prediction network");
    trainAm->add_option("--config", configSink, configHelp);
    trainAm->add_option("--corpus", ta.corpus, "Corpus cache")->required();
    trainAm->add_option("--out", ta.out, "Output model file")->required();
    trainAm->add_option("--hidden", ta.cfg.hiddenSize, "Hidden layer size");
    trainAm->add_option("--batch-fraction", ta.cfg.batchFraction,
                        "Batch size as a percent of the training split");
    trainAm->add_option("--learning-rate", ta.cfg.learningRate, "Learning rate");
    trainAm->add_option("--final-learning-rate", ta.cfg.finalLearningRate,
                        "Linear decay floor (constant rate when omitted)");
    trainAm->add_option("--momentum", ta.cfg.momentum, "Momentum coefficient");
    trainAm->add_option("--epochs", ta.cfg.epochs, "Training epochs");
    trainAm->add_option("--seed", ta.cfg.seed, "RNG seed");
    auto* minWhoOpt = trainAm->add_option(
        "--min-who", ta.minWho, "Train only on recipes scoring above this WHO value");
    trainAm->callback([&ta, minWhoOpt]() {
        const auto [table, corpus] = load_corpus_cache(ta.corpus);
        const AmountModel model = minWhoOpt->count() > 0
                                      ? train_amounts(corpus, table, ta.cfg, ta.minWho)
                                      : train_amounts(corpus, table, ta.cfg);
        save_amounts(ta.out, model);
        std::cout << "trained amount model (hidden " << ta.cfg.hiddenSize << "), wrote "
                  << ta.out << "\n";
    });

    // eval-ip
    struct {
        std::string corpus, out, split = "test";
        std::vector<std::string> predictors{"embedding"};
        cli::PredictorSources src;
    } ei;
    auto* evalIp = app.add_subcommand("eval-ip", "Missing-ingredient ranking evaluation");
    evalIp->add_option("--config", configSink, configHelp);
    evalIp->add_option("--corpus", ei.corpus, "Corpus cache")->required();
    evalIp->add_option("--predictors", ei.predictors, "Predictors to evaluate")
        ->delimiter(',');
    evalIp->add_option("--split", ei.split, "Recipe split to evaluate on")
        ->check(CLI::IsMember({"train", "validation", "test"}));
    evalIp->add_option("--embedding-model", ei.src.embeddingPath, "Embedding model file");
    evalIp->add_option("--amounts-model", ei.src.amountsPath, "Amount model file");
    evalIp->add_option("--nmf-factors", ei.src.nmfFactors, "NMF latent factors");
    evalIp->add_option("--nmf-iterations", ei.src.nmfIterations, "NMF update iterations");
    evalIp->add_option("--seed", ei.src.seed, "Seed for held-out draws and NMF init");
    evalIp->add_option("--out", ei.out, "CSV output (stdout when omitted)");
    evalIp->callback([&ei]() {
        const auto [table, corpus] = load_corpus_cache(ei.corpus);
        const Split split = ei.split == "train"        ? Split::train
                            : ei.split == "validation" ? Split::validation
                                                       : Split::test;
        const std::vector<std::size_t> indices =
            corpus.hasSplits() ? corpus.indicesOf(split) : [&corpus] {
                std::vector<std::size_t> all(corpus.recipes.size());
                std::iota(all.begin(), all.end(), std::size_t{0});
                return all;
            }();
        std::vector<std::pair<std::string, RankMetrics>> rows;
        for (const std::string& name : ei.predictors) {
            const cli::Predictor p = cli::make_predictor(name, corpus, table, ei.src);
            rows.emplace_back(name,
                              eval_missing_ingredient(p.ranker, corpus, indices, ei.src.seed));
        }
        if (ei.out.empty()) {
            write_rank_csv(std::cout, rows);
        } else {
            auto out = cli::open_output(ei.out);
            write_rank_csv(out, rows);
            std::cout << "wrote " << ei.out << "\n";
        }
    });

    // eval-amounts
    struct {
        std::string corpus, out;
        std::vector<std::size_t> hidden{512};
        std::vector<double> fractions{9.0};
        AmountTrainConfig cfg;
    } ea;
    auto* evalAm = app.add_subcommand("eval-amounts", "Amount model MAE sweep");
    evalAm->add_option("--config", configSink, configHelp);
    evalAm->add_option("--corpus", ea.corpus, "Corpus cache")->required();
    evalAm->add_option("--hidden", ea.hidden, "Hidden sizes to sweep")->delimiter(',');
    evalAm->add_option("--batch-fractions", ea.fractions, "Batch percents to sweep")
        ->delimiter(',');
    evalAm->add_option("--learning-rate", ea.cfg.learningRate, "Learning rate");
    evalAm->add_option("--final-learning-rate", ea.cfg.finalLearningRate,
                       "Linear decay floor (constant rate when omitted)");
    evalAm->add_option("--momentum", ea.cfg.momentum, "Momentum coefficient");
    evalAm->add_option("--epochs", ea.cfg.epochs, "Training epochs");
    evalAm->add_option("--seed", ea.cfg.seed, "RNG seed");
    evalAm->add_option("--out", ea.out, "CSV output (stdout when omitted)");
    evalAm->callback([&ea]() {
        const auto [table, corpus] = load_corpus_cache(ea.corpus);
        if (!corpus.hasSplits()) throw DataError("eval-amounts needs a split corpus");
        std::vector<const Recipe*> train, val;
        for (std::size_t i : corpus.indicesOf(Split::train)) train.push_back(&corpus.recipes[i]);
        for (std::size_t i : corpus.indicesOf(Split::validation))
            val.push_back(&corpus.recipes[i]);
        if (val.empty()) throw DataError("validation split is empty");

        std::ostringstream csv;
        csv << "hidden,batch_fraction,train_mae,validation_mae\n";
        for (std::size_t h : ea.hidden) {
            for (double f : ea.fractions) {
                AmountTrainConfig cfg = ea.cfg;
                cfg.hiddenSize = h;
                cfg.batchFraction = f;
                const AmountModel model = train_amounts(corpus, table, cfg);
                csv << h << ',' << format_double(f) << ','
                    << format_double(eval_mae(model, train)) << ','
                    << format_double(eval_mae(model, val)) << '\n';
            }
        }
        if (ea.out.empty()) {
            std::cout << csv.str();
        } else {
            auto out = cli::open_output(ea.out);
            out << csv.str();
            std::cout << "wrote " << ea.out << "\n";
        }
    });

    // recommend
    struct {
        std::string corpus, ingredients, predictor = "embedding", out;
        cli::PredictorSources src;
        RecommendConfig cfg;
    } rc;
    auto* recSub = app.add_subcommand("recommend", "Recommend recipes for an ingredient set");
    recSub->add_option("--config", configSink, configHelp);
    recSub->add_option("--corpus", rc.corpus, "Corpus cache")->required();
    recSub->add_option("--ingredients", rc.ingredients, "Comma-separated ingredient names")
        ->required();
    recSub->add_option("--embedding-model", rc.src.embeddingPath, "Embedding model file");
    recSub->add_option("--amounts-model", rc.src.amountsPath, "Amount model file")->required();
    recSub->add_option("--predictor", rc.predictor, "Candidate predictor")
        ->check(CLI::IsMember({"embedding", "graph", "mlp", "nmf"}));
    recSub->add_option("--k", rc.cfg.resultCount, "Recommendations to return");
    recSub->add_option("--cos-weight", rc.cfg.cosWeight, "Cosine weight in the similarity");
    recSub->add_option("--add-cap", rc.cfg.addCap, "Max ingredients added greedily");
    recSub->add_option("--candidate-pool", rc.cfg.candidatePool,
                       "Candidates considered per greedy step");
    recSub->add_option("--target-scale", rc.cfg.targetScale, "Scale on the nutrient targets");
    recSub->add_option("--nmf-factors", rc.src.nmfFactors, "NMF latent factors");
    recSub->add_option("--nmf-iterations", rc.src.nmfIterations, "NMF update iterations");
    recSub->add_option("--seed", rc.src.seed, "Seed for NMF init");
    recSub->add_option("--out", rc.out, "Also write the JSON report here");
    recSub->callback([&rc]() {
        const auto [table, corpus] = load_corpus_cache(rc.corpus);
        const AmountModel amounts = load_amounts(rc.src.amountsPath);
        check_vocab_hash(amounts.vocabHash, table.vocabHash, "amount model");
        const cli::Predictor p = cli::make_predictor(rc.predictor, corpus, table, rc.src);
        const std::vector<IngredientId> seedSet =
            cli::parse_ingredient_list(rc.ingredients, table);

        const PseudoRecipe pr = build_pseudo_recipe(seedSet, p.ranker, amounts, table, rc.cfg);
        const RecommendList rec = recommend(pr, corpus, rc.cfg);

        nlohmann::json prJson;
        prJson["ingredients"] = nlohmann::json::array();
        for (std::size_t i = 0; i < pr.ingredients.size(); ++i)
            prJson["ingredients"].push_back({{"name", table.names[pr.ingredients[i]]},
                                             {"grams", pr.amounts[i]}});
        prJson["nutrients"] = cli::nutrients_json(pr.nutrients);
        prJson["whoScore"] = who_score(pr.nutrients);
        prJson["mseTrace"] = pr.mseTrace;

        nlohmann::json recs = nlohmann::json::array();
        for (const RecommendedRecipe& e : rec.entries) {
            const Recipe& r = corpus.recipes[e.recipeIndex];
            nlohmann::json names = nlohmann::json::array();
            for (const auto& entry : r.entries) names.push_back(table.names[entry.ingredient]);
            recs.push_back({{"recipeId", r.id},
                            {"similarity", e.similarity},
                            {"whoScore", who_score(recipe_nutrients(r, table))},
                            {"ingredients", names}});
        }

        const nlohmann::json report = {{"pseudoRecipe", prJson},
                                       {"recommendations", recs},
                                       {"requestedK", rc.cfg.resultCount},
                                       {"shortOfK", rec.shortOfK}};
        const std::string text = report.dump(2);
        if (rc.out.empty()) {
            std::cout << text << "\n";
        } else {
            auto out = cli::open_output(rc.out);
            out << text << "\n";
            std::cout << "wrote " << rc.out << "\n";
        }
    });

    // eval-nutrec
    struct {
        std::string corpus, outCsv, outJson;
        std::vector<std::string> predictors{"embedding"};
        std::vector<double> cosGrid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        std::size_t seedSize = 2, seedCount = 120;
        cli::PredictorSources src;
        RecommendConfig cfg;
        AmountTrainConfig amountCfg;
        int minWho = 0;
    } en;
    auto* evalNut = app.add_subcommand("eval-nutrec", "WHO score sweep over cosine weights");
    evalNut->add_option("--config", configSink, configHelp);
    evalNut->add_option("--corpus", en.corpus, "Corpus cache")->required();
    evalNut->add_option("--predictors", en.predictors, "Predictors to sweep")->delimiter(',');
    evalNut->add_option("--cos-grid", en.cosGrid, "Cosine weights to sweep")->delimiter(',');
    evalNut->add_option("--embedding-model", en.src.embeddingPath, "Embedding model file");
    evalNut->add_option("--amounts-model", en.src.amountsPath, "Amount model file");
    evalNut->add_option("--seed-size", en.seedSize, "Ingredients per seed set");
    evalNut->add_option("--seed-count", en.seedCount, "Seed sets to evaluate");
    evalNut->add_option("--k", en.cfg.resultCount, "Recommendations per seed set");
    evalNut->add_option("--add-cap", en.cfg.addCap, "Max ingredients added greedily");
    evalNut->add_option("--candidate-pool", en.cfg.candidatePool,
                        "Candidates considered per greedy step");
    evalNut->add_option("--target-scale", en.cfg.targetScale, "Scale on the nutrient targets");
    evalNut->add_option("--nmf-factors", en.src.nmfFactors, "NMF latent factors");
    evalNut->add_option("--nmf-iterations", en.src.nmfIterations, "NMF update iterations");
    evalNut->add_option("--seed", en.src.seed, "Seed for NMF init and retraining");
    auto* enMinWho = evalNut->add_option(
        "--min-who", en.minWho,
        "Retrain the amount model on recipes scoring above this WHO value");
    evalNut->add_option("--hidden", en.amountCfg.hiddenSize, "Hidden size when retraining");
    evalNut->add_option("--batch-fraction", en.amountCfg.batchFraction,
                        "Batch percent when retraining");
    evalNut->add_option("--epochs", en.amountCfg.epochs, "Epochs when retraining");
    evalNut->add_option("--learning-rate", en.amountCfg.learningRate,
                        "Learning rate when retraining");
    evalNut->add_option("--final-learning-rate", en.amountCfg.finalLearningRate,
                        "Linear decay floor when retraining");
    evalNut->add_option("--momentum", en.amountCfg.momentum,
                        "Momentum coefficient when retraining");
    evalNut->add_option("--out-csv", en.outCsv, "CSV output (stdout when omitted)");
    evalNut->add_option("--out-json", en.outJson, "Optional JSON output");
    evalNut->callback([&en, enMinWho]() {
        const auto [table, corpus] = load_corpus_cache(en.corpus);

        AmountModel amounts;
        if (enMinWho->count() > 0) {
            AmountTrainConfig cfg = en.amountCfg;
            cfg.seed = en.src.seed;
            amounts = train_amounts(corpus, table, cfg, en.minWho);
        } else {
            if (en.src.amountsPath.empty())
                throw DataError("eval-nutrec requires --amounts-model (or --min-who to retrain)");
            amounts = load_amounts(en.src.amountsPath);
            check_vocab_hash(amounts.vocabHash, table.vocabHash, "amount model");
        }

        std::vector<NamedRanker> rankers;
        for (const std::string& name : en.predictors) {
            cli::Predictor p = cli::make_predictor(name, corpus, table, en.src);
            rankers.push_back({p.name, std::move(p.ranker)});
        }

        const WhoReport report = eval_nutrec(corpus, table, rankers, amounts, en.cfg,
                                             en.cosGrid, en.seedSize, en.seedCount);
        if (en.outCsv.empty()) {
            write_who_csv(std::cout, report);
        } else {
            auto out = cli::open_output(en.outCsv);
            write_who_csv(out, report);
            std::cout << "wrote " << en.outCsv << "\n";
        }
        if (!en.outJson.empty()) {
            auto out = cli::open_output(en.outJson);
            out << cli::who_report_json(report).dump(2) << "\n";
        }
    });

    try {
        const std::vector<std::string> expanded = cli::apply_config_files(args, app);
        std::vector<const char*> argv;
        argv.reserve(expanded.size() + 1);
        argv.push_back("nutrec");
        for (const std::string& a : expanded) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ModelCompatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace nutrec
