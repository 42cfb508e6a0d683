#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nipen/objective.hpp"
#include "nipen/synth.hpp"
#include "nipen/votemodel.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Run configuration: one JSON file with nested sections, every key known,
// command-line flags win over file values. Commands validate the fields
// they actually use.
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string votes_path;
    std::string docs_path;
    std::string meta_path;

    std::string out_dir = "out";
    uint64_t seed = 0;
    ModelVariant variant = ModelVariant::PgmVae;
    TensorComposition composition = TensorComposition::Printed;
    int folds = 5;
    std::string checkpoint_path; // eval/interpret input; empty = <out>/model.ckpt

    Hyperparams hp;

    int synth_legislators = 30;
    int synth_bills = 60;
    int synth_vocab = 50;
    int synth_words_per_doc = 80;
    SynthOptions synth;

    int top_words = 5;
    double trust_threshold = 0.1;
    std::vector<double> party_thresholds = {0.05, 0.1};
    std::vector<int> top_k_list = {5, 10};
    std::string bill_dates_path;

    std::vector<double> sweep_lambda_y = {0.01, 0.1, 1.0, 10.0};
    std::vector<double> sweep_lambda_tau = {1.0};
    std::vector<int> sweep_trust_rank = {3};
};

// Parses and fully validates; throws ConfigError on unknown keys, type
// mismatches or out-of-range values.
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig parse_config_file(const std::string& path);

// Effective configuration (defaults filled in) as pretty JSON, used for the
// run manifest.
std::string config_to_json(const RunConfig& cfg);

} // namespace nipen
