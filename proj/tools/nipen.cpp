#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nipen/config.hpp"
#include "nipen/corpus.hpp"
#include "nipen/error.hpp"
#include "nipen/evaluate.hpp"
#include "nipen/interpret.hpp"
#include "nipen/synth.hpp"
#include "nipen/text.hpp"
#include "nipen/trainer.hpp"

namespace fs = std::filesystem;
using namespace nipen;

namespace {

constexpr const char* kToolVersion = "nipen 0.1.0";

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write '" + path + "'");
    os << content;
    if (!os) throw DataError("write failed for '" + path + "'");
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs) {
    nlohmann::json manifest;
    manifest["tool"] = kToolVersion;
    manifest["command"] = command;
    manifest["seed"] = cfg.seed;
    manifest["config"] = nlohmann::json::parse(config_to_json(cfg));
    manifest["outputs"] = outputs;
    write_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

std::string ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + cfg.out_dir + "'");
    return cfg.out_dir;
}

Corpus load_configured_corpus(const RunConfig& cfg, int min_unique_words) {
    if (cfg.votes_path.empty() || cfg.docs_path.empty() || cfg.meta_path.empty())
        throw ConfigError("corpus.votes, corpus.docs and corpus.meta are required");
    return load_corpus(cfg.votes_path, cfg.docs_path, cfg.meta_path, min_unique_words);
}

std::string checkpoint_path_for(const RunConfig& cfg) {
    return cfg.checkpoint_path.empty() ? cfg.out_dir + "/model.ckpt" : cfg.checkpoint_path;
}

void cmd_validate(const RunConfig& cfg) {
    const Corpus corpus = load_configured_corpus(cfg, cfg.hp.min_unique_words);
    const CorpusStats stats = corpus_stats(corpus);
    std::cout << "legislators   " << stats.num_legislators << "\n"
              << "bills         " << stats.num_bills << "\n"
              << "votes         " << stats.num_votes << "\n"
              << "yea / nay     " << stats.num_yea << " / " << stats.num_nay << "\n"
              << "vocabulary    " << stats.vocab_size << "\n"
              << "short docs    " << stats.num_flagged_docs << "\n"
              << "density       " << format_fixed(stats.density, 4) << "\n";
}

void cmd_synth(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const GroundTruth gt =
        sample_ground_truth(cfg.synth_legislators, cfg.synth_bills, cfg.hp.num_topics,
                            cfg.synth_vocab, cfg.hp.trust_rank, cfg.hp, cfg.seed, cfg.synth);
    const Corpus corpus = generate_corpus(gt, cfg.synth_words_per_doc, cfg.seed);

    const std::string votes = cfg.out_dir + "/votes.csv";
    const std::string docs = cfg.out_dir + "/docterm.txt";
    const std::string meta = cfg.out_dir + "/meta.csv";
    save_votes(votes, corpus.votes, corpus.legislator_ids, corpus.bill_ids);
    save_docterm(docs, corpus.docs);
    save_meta(meta, corpus.meta);
    write_manifest(cfg, "synth", {"votes.csv", "docterm.txt", "meta.csv"});

    const CorpusStats stats = corpus_stats(corpus);
    std::cout << "synthetic corpus: " << stats.num_legislators << " legislators, "
              << stats.num_bills << " bills, " << stats.num_votes << " votes -> "
              << cfg.out_dir << "\n";
}

void cmd_train(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const Corpus corpus = load_configured_corpus(cfg, cfg.hp.min_unique_words);
    const JointData data = JointData::build(corpus.votes, corpus.docs, corpus.neighbors);
    const TrainState state = train(data, cfg.hp, cfg.variant, cfg.composition, cfg.seed);

    save_checkpoint(state, cfg.out_dir + "/model.ckpt");
    write_training_log(cfg.out_dir + "/training_log.csv", state.history);
    write_manifest(cfg, "train", {"model.ckpt", "training_log.csv"});

    const double final_loss = state.history.empty() ? 0.0 : state.history.back().loss.total;
    std::cout << "trained " << variant_name(cfg.variant) << " for " << state.epoch
              << " epochs, final objective " << format_g17(final_loss) << " -> "
              << cfg.out_dir << "/model.ckpt\n";
}

void cmd_eval(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const std::string ckpt = checkpoint_path_for(cfg);
    if (!fs::exists(ckpt))
        throw DataError("no model at '" + ckpt + "'; run train first or pass --checkpoint");
    const TrainState state = load_checkpoint(ckpt);

    const Corpus corpus = load_configured_corpus(cfg, state.hp.min_unique_words);
    const CvReport report = cross_validate(corpus, state.hp, state.model.variant,
                                           state.model.composition, cfg.folds, cfg.seed);

    const std::vector<std::pair<std::string, CvReport>> rows = {
        {variant_name(state.model.variant), report}};
    write_file(cfg.out_dir + "/metrics.csv", compare_csv(rows));

    std::string folds_csv = "fold,rmse,mae,accuracy,nall,n_cells\n";
    for (size_t f = 0; f < report.per_fold.size(); ++f) {
        const Metrics& m = report.per_fold[f];
        folds_csv += std::to_string(f) + "," + format_g17(m.rmse) + "," + format_g17(m.mae) +
                     "," + format_g17(m.accuracy) + "," + format_g17(m.nall) + "," +
                     std::to_string(m.n_cells) + "\n";
    }
    write_file(cfg.out_dir + "/metrics_folds.csv", folds_csv);
    write_manifest(cfg, "eval", {"metrics.csv", "metrics_folds.csv"});
    std::cout << compare_table(rows);
}

void cmd_sweep(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const Corpus corpus = load_configured_corpus(cfg, cfg.hp.min_unique_words);
    const std::vector<SweepRow> rows =
        sweep(corpus, cfg.hp, cfg.variant, cfg.composition, cfg.sweep_lambda_y,
              cfg.sweep_lambda_tau, cfg.sweep_trust_rank, cfg.folds, cfg.seed);
    write_file(cfg.out_dir + "/sweep.csv", sweep_csv(rows));
    write_manifest(cfg, "sweep", {"sweep.csv"});

    const SweepRow* best = nullptr;
    for (const SweepRow& row : rows)
        if (row.ok && (best == nullptr || row.report.mean.accuracy > best->report.mean.accuracy))
            best = &row;
    if (best != nullptr)
        std::cout << "best point: lambda_y=" << short_num(best->point.lambda_y)
                  << " lambda_tau=" << short_num(best->point.lambda_tau)
                  << " trust_rank=" << best->point.trust_rank << " accuracy "
                  << format_fixed(best->report.mean.accuracy, 4) << "\n";
    else
        std::cout << "sweep completed with no successful points\n";
}

std::vector<Date> load_bill_dates(const std::string& path, const IdMap& bills) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open bill dates '" + path + "'");
    std::vector<Date> dates(bills.size(), 0);
    std::vector<uint8_t> seen(bills.size(), 0);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::vector<std::string> fields = split(stripped, ',');
        if (fields.size() != 2)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected 'bill_id,date'");
        const int d = bills.at(fields[0]);
        dates[d] = parse_date(fields[1]);
        seen[d] = 1;
    }
    for (int d = 0; d < bills.size(); ++d)
        if (!seen[d]) throw DataError("bill dates '" + path + "' missing bill '" +
                                      bills.names[d] + "'");
    return dates;
}

void cmd_interpret(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const std::string ckpt = checkpoint_path_for(cfg);
    if (!fs::exists(ckpt))
        throw DataError("no model at '" + ckpt + "'; run train first or pass --checkpoint");
    const TrainState state = load_checkpoint(ckpt);
    const Model& model = state.model;

    const Corpus corpus = load_configured_corpus(cfg, state.hp.min_unique_words);
    if (corpus.votes.num_legislators != model.pgm.num_legislators() ||
        corpus.votes.num_bills != model.pgm.num_bills())
        throw DataError("corpus shape does not match the checkpointed model");

    std::vector<Date> bill_dates;
    if (!cfg.bill_dates_path.empty())
        bill_dates = load_bill_dates(cfg.bill_dates_path, corpus.bill_ids);

    const WordTopicTable words = word_topic_matrix(model.ae, cfg.top_words);
    const auto scatter = legislator_scatter(model, corpus.meta);
    const TrustEdgeList edges = trust_network(model, corpus.neighbors, cfg.trust_threshold);
    const PartyNetworkStats party_stats =
        party_network_stats(model, corpus.meta, corpus.neighbors, cfg.party_thresholds);
    const ScalingReport rankings = scaling_rankings(model, corpus.meta, cfg.top_k_list);
    const auto timeline = alpha_beta_timeline(model, corpus.meta, corpus.votes, bill_dates);

    write_file(cfg.out_dir + "/word_topics.csv", word_topic_csv(words, nullptr));
    write_file(cfg.out_dir + "/bill_profiles.csv",
               bill_profiles_csv(model, corpus.docs, corpus.bill_ids));
    write_file(cfg.out_dir + "/legislator_scatter.csv",
               scatter_csv(scatter, corpus.legislator_ids));
    write_file(cfg.out_dir + "/trust_edges.csv",
               trust_edges_csv(edges, corpus.legislator_ids));
    write_file(cfg.out_dir + "/trust_edges.txt", trust_edges_graph(edges));
    write_file(cfg.out_dir + "/party_stats.csv", party_stats_csv(party_stats));
    write_file(cfg.out_dir + "/rankings.csv", rankings_csv(rankings));
    write_file(cfg.out_dir + "/timeline.csv", timeline_csv(timeline));
    write_manifest(cfg, "interpret",
                   {"word_topics.csv", "bill_profiles.csv", "legislator_scatter.csv",
                    "trust_edges.csv", "trust_edges.txt", "party_stats.csv", "rankings.csv",
                    "timeline.csv"});
    std::cout << "interpretation exports written to " << cfg.out_dir << " ("
              << edges.edges.size() << " trust edges at threshold "
              << format_fixed(cfg.trust_threshold, 2) << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NIPEN legislative ideal-point models: autoencoded bill text, "
                 "topic-factorized votes and trust networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string variant_override;
    std::string checkpoint_override;
    uint64_t seed_override = 0;
    int folds_override = 0;

    auto* opt_config = app.add_option("--config", config_path, "JSON run configuration");
    auto* opt_seed = app.add_option("--seed", seed_override, "master random seed");
    auto* opt_out = app.add_option("--out", out_override, "output directory");
    auto* opt_variant =
        app.add_option("--variant", variant_override,
                       "model variant: pgm-vae, pgm-sdae, pgm-vae-fullrank or tensor");
    auto* opt_folds = app.add_option("--folds", folds_override, "cross-validation folds");
    auto* opt_ckpt =
        app.add_option("--checkpoint", checkpoint_override, "checkpoint for eval/interpret");

    CLI::App* sub_validate = app.add_subcommand("validate", "load a corpus and print stats");
    CLI::App* sub_synth = app.add_subcommand("synth", "generate a synthetic corpus");
    CLI::App* sub_train = app.add_subcommand("train", "train on the full corpus");
    CLI::App* sub_eval = app.add_subcommand("eval", "cross-validated held-out metrics");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "hyperparameter grid search");
    CLI::App* sub_interpret = app.add_subcommand("interpret", "export qualitative artifacts");
    for (CLI::App* sub :
         {sub_validate, sub_synth, sub_train, sub_eval, sub_sweep, sub_interpret})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg;
        if (opt_config->count() > 0) cfg = parse_config_file(config_path);
        if (opt_seed->count() > 0) {
            cfg.seed = seed_override;
            cfg.hp.seed = seed_override;
        }
        if (opt_out->count() > 0) cfg.out_dir = out_override;
        if (opt_variant->count() > 0) cfg.variant = variant_from_name(variant_override);
        if (opt_folds->count() > 0) {
            if (folds_override < 2) throw ConfigError("--folds must be at least 2");
            cfg.folds = folds_override;
        }
        if (opt_ckpt->count() > 0) cfg.checkpoint_path = checkpoint_override;

        if (sub_validate->parsed()) cmd_validate(cfg);
        else if (sub_synth->parsed()) cmd_synth(cfg);
        else if (sub_train->parsed()) cmd_train(cfg);
        else if (sub_eval->parsed()) cmd_eval(cfg);
        else if (sub_sweep->parsed()) cmd_sweep(cfg);
        else if (sub_interpret->parsed()) cmd_interpret(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
