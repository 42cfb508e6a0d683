#include "nipen/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "nipen/error.hpp"

namespace nipen {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown config key '" + section + item.key() + "'");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("config key '" + where + "' must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer())
        throw ConfigError("config key '" + where + "' must be an integer");
    return v.get<int>();
}

uint64_t as_seed(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<uint64_t>();
    if (v.is_number_integer() && v.get<int64_t>() >= 0)
        return static_cast<uint64_t>(v.get<int64_t>());
    throw ConfigError("config key '" + where + "' must be a nonnegative integer");
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError("config key '" + where + "' must be a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("config key '" + where + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty())
        throw ConfigError("config key '" + where + "' must be a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : v) out.push_back(as_number(e, where));
    return out;
}

std::vector<int> as_int_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty())
        throw ConfigError("config key '" + where + "' must be a non-empty array of integers");
    std::vector<int> out;
    for (const json& e : v) out.push_back(as_int(e, where));
    return out;
}

void parse_corpus(const json& obj, RunConfig& cfg) {
    reject_unknown(obj, "corpus.", {"votes", "docs", "meta"});
    if (const json* v = find(obj, "votes")) cfg.votes_path = as_string(*v, "corpus.votes");
    if (const json* v = find(obj, "docs")) cfg.docs_path = as_string(*v, "corpus.docs");
    if (const json* v = find(obj, "meta")) cfg.meta_path = as_string(*v, "corpus.meta");
}

void parse_model(const json& obj, RunConfig& cfg) {
    reject_unknown(obj, "model.", {"variant", "composition"});
    if (const json* v = find(obj, "variant"))
        cfg.variant = variant_from_name(as_string(*v, "model.variant"));
    if (const json* v = find(obj, "composition")) {
        const std::string name = as_string(*v, "model.composition");
        if (name == "printed")
            cfg.composition = TensorComposition::Printed;
        else if (name == "prose")
            cfg.composition = TensorComposition::Prose;
        else
            throw ConfigError("model.composition must be 'printed' or 'prose', got '" + name +
                              "'");
    }
}

void parse_hyperparams(const json& obj, Hyperparams& hp) {
    reject_unknown(obj, "hyperparams.",
                   {"lambda_f", "lambda_y", "lambda_u", "lambda_tau", "lambda_alpha",
                    "lambda_n", "num_topics", "trust_rank", "num_samples", "corruption_ratio",
                    "learning_rate", "epochs", "inner_steps", "hidden", "tensor_layers",
                    "warmup_epochs", "momentum", "line_search", "pin_noise_once",
                    "min_unique_words", "network_enabled"});
    if (const json* v = find(obj, "lambda_f")) hp.lambda_f = as_number(*v, "hyperparams.lambda_f");
    if (const json* v = find(obj, "lambda_y")) hp.lambda_y = as_number(*v, "hyperparams.lambda_y");
    if (const json* v = find(obj, "lambda_u")) hp.lambda_u = as_number(*v, "hyperparams.lambda_u");
    if (const json* v = find(obj, "lambda_tau"))
        hp.lambda_tau = as_number(*v, "hyperparams.lambda_tau");
    if (const json* v = find(obj, "lambda_alpha"))
        hp.lambda_alpha = as_number(*v, "hyperparams.lambda_alpha");
    if (const json* v = find(obj, "lambda_n")) hp.lambda_n = as_number(*v, "hyperparams.lambda_n");
    if (const json* v = find(obj, "num_topics"))
        hp.num_topics = as_int(*v, "hyperparams.num_topics");
    if (const json* v = find(obj, "trust_rank"))
        hp.trust_rank = as_int(*v, "hyperparams.trust_rank");
    if (const json* v = find(obj, "num_samples"))
        hp.num_samples = as_int(*v, "hyperparams.num_samples");
    if (const json* v = find(obj, "corruption_ratio"))
        hp.corruption_ratio = as_number(*v, "hyperparams.corruption_ratio");
    if (const json* v = find(obj, "learning_rate"))
        hp.learning_rate = as_number(*v, "hyperparams.learning_rate");
    if (const json* v = find(obj, "epochs")) hp.epochs = as_int(*v, "hyperparams.epochs");
    if (const json* v = find(obj, "inner_steps"))
        hp.inner_steps = as_int(*v, "hyperparams.inner_steps");
    if (const json* v = find(obj, "hidden")) hp.hidden = as_int_list(*v, "hyperparams.hidden");
    if (const json* v = find(obj, "tensor_layers"))
        hp.tensor_layers = as_int(*v, "hyperparams.tensor_layers");
    if (const json* v = find(obj, "warmup_epochs"))
        hp.warmup_epochs = as_int(*v, "hyperparams.warmup_epochs");
    if (const json* v = find(obj, "momentum")) hp.momentum = as_number(*v, "hyperparams.momentum");
    if (const json* v = find(obj, "line_search"))
        hp.line_search = as_bool(*v, "hyperparams.line_search");
    if (const json* v = find(obj, "pin_noise_once"))
        hp.pin_noise_once = as_bool(*v, "hyperparams.pin_noise_once");
    if (const json* v = find(obj, "min_unique_words"))
        hp.min_unique_words = as_int(*v, "hyperparams.min_unique_words");
    if (const json* v = find(obj, "network_enabled"))
        hp.network_enabled = as_bool(*v, "hyperparams.network_enabled");
}

void parse_synth(const json& obj, RunConfig& cfg) {
    reject_unknown(obj, "synth.",
                   {"legislators", "bills", "vocab", "words_per_doc", "eta_max",
                    "dirichlet_alpha", "code_dominance_lo", "code_dominance_hi", "alpha_mean",
                    "alpha_std", "beta_mean", "beta_std", "planted_u0", "planted_u1",
                    "planted_tau", "background_tau_std", "use_tensor"});
    if (const json* v = find(obj, "legislators"))
        cfg.synth_legislators = as_int(*v, "synth.legislators");
    if (const json* v = find(obj, "bills")) cfg.synth_bills = as_int(*v, "synth.bills");
    if (const json* v = find(obj, "vocab")) cfg.synth_vocab = as_int(*v, "synth.vocab");
    if (const json* v = find(obj, "words_per_doc"))
        cfg.synth_words_per_doc = as_int(*v, "synth.words_per_doc");
    SynthOptions& s = cfg.synth;
    if (const json* v = find(obj, "eta_max")) s.eta_max = as_number(*v, "synth.eta_max");
    if (const json* v = find(obj, "dirichlet_alpha"))
        s.dirichlet_alpha = as_number(*v, "synth.dirichlet_alpha");
    if (const json* v = find(obj, "code_dominance_lo"))
        s.code_dominance_lo = as_number(*v, "synth.code_dominance_lo");
    if (const json* v = find(obj, "code_dominance_hi"))
        s.code_dominance_hi = as_number(*v, "synth.code_dominance_hi");
    if (const json* v = find(obj, "alpha_mean")) s.alpha_mean = as_number(*v, "synth.alpha_mean");
    if (const json* v = find(obj, "alpha_std")) s.alpha_std = as_number(*v, "synth.alpha_std");
    if (const json* v = find(obj, "beta_mean")) s.beta_mean = as_number(*v, "synth.beta_mean");
    if (const json* v = find(obj, "beta_std")) s.beta_std = as_number(*v, "synth.beta_std");
    if (const json* v = find(obj, "planted_u0")) s.planted_u0 = as_int(*v, "synth.planted_u0");
    if (const json* v = find(obj, "planted_u1")) s.planted_u1 = as_int(*v, "synth.planted_u1");
    if (const json* v = find(obj, "planted_tau"))
        s.planted_tau = as_number(*v, "synth.planted_tau");
    if (const json* v = find(obj, "background_tau_std"))
        s.background_tau_std = as_number(*v, "synth.background_tau_std");
    if (const json* v = find(obj, "use_tensor")) s.use_tensor = as_bool(*v, "synth.use_tensor");
}

void parse_interpret(const json& obj, RunConfig& cfg) {
    reject_unknown(obj, "interpret.",
                   {"top_words", "trust_threshold", "party_thresholds", "top_k", "bill_dates"});
    if (const json* v = find(obj, "top_words")) cfg.top_words = as_int(*v, "interpret.top_words");
    if (const json* v = find(obj, "trust_threshold"))
        cfg.trust_threshold = as_number(*v, "interpret.trust_threshold");
    if (const json* v = find(obj, "party_thresholds"))
        cfg.party_thresholds = as_number_list(*v, "interpret.party_thresholds");
    if (const json* v = find(obj, "top_k")) cfg.top_k_list = as_int_list(*v, "interpret.top_k");
    if (const json* v = find(obj, "bill_dates"))
        cfg.bill_dates_path = as_string(*v, "interpret.bill_dates");
}

void parse_sweep(const json& obj, RunConfig& cfg) {
    reject_unknown(obj, "sweep.", {"lambda_y", "lambda_tau", "trust_rank"});
    if (const json* v = find(obj, "lambda_y"))
        cfg.sweep_lambda_y = as_number_list(*v, "sweep.lambda_y");
    if (const json* v = find(obj, "lambda_tau"))
        cfg.sweep_lambda_tau = as_number_list(*v, "sweep.lambda_tau");
    if (const json* v = find(obj, "trust_rank"))
        cfg.sweep_trust_rank = as_int_list(*v, "sweep.trust_rank");
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError("cannot parse config " + origin + ": " + err.what());
    }
    if (!root.is_object()) throw ConfigError("config " + origin + " must be a JSON object");

    reject_unknown(root, "",
                   {"corpus", "model", "hyperparams", "synth", "sweep", "interpret", "out",
                    "seed", "folds", "checkpoint"});

    RunConfig cfg;
    if (const json* v = find(root, "corpus")) parse_corpus(*v, cfg);
    if (const json* v = find(root, "model")) parse_model(*v, cfg);
    if (const json* v = find(root, "hyperparams")) parse_hyperparams(*v, cfg.hp);
    if (const json* v = find(root, "synth")) parse_synth(*v, cfg);
    if (const json* v = find(root, "sweep")) parse_sweep(*v, cfg);
    if (const json* v = find(root, "interpret")) parse_interpret(*v, cfg);
    if (const json* v = find(root, "out")) cfg.out_dir = as_string(*v, "out");
    if (const json* v = find(root, "seed")) cfg.seed = as_seed(*v, "seed");
    if (const json* v = find(root, "folds")) cfg.folds = as_int(*v, "folds");
    if (const json* v = find(root, "checkpoint"))
        cfg.checkpoint_path = as_string(*v, "checkpoint");

    cfg.hp.seed = cfg.seed;
    cfg.hp.validate();
    if (cfg.folds < 2) throw ConfigError("folds must be at least 2");
    if (cfg.out_dir.empty()) throw ConfigError("out must not be empty");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), "'" + path + "'");
}

std::string config_to_json(const RunConfig& cfg) {
    json root;
    root["corpus"] = {{"votes", cfg.votes_path}, {"docs", cfg.docs_path}, {"meta", cfg.meta_path}};
    root["model"] = {{"variant", variant_name(cfg.variant)},
                     {"composition",
                      cfg.composition == TensorComposition::Printed ? "printed" : "prose"}};
    const Hyperparams& hp = cfg.hp;
    root["hyperparams"] = {{"lambda_f", hp.lambda_f},
                           {"lambda_y", hp.lambda_y},
                           {"lambda_u", hp.lambda_u},
                           {"lambda_tau", hp.lambda_tau},
                           {"lambda_alpha", hp.lambda_alpha},
                           {"lambda_n", hp.lambda_n},
                           {"num_topics", hp.num_topics},
                           {"trust_rank", hp.trust_rank},
                           {"num_samples", hp.num_samples},
                           {"corruption_ratio", hp.corruption_ratio},
                           {"learning_rate", hp.learning_rate},
                           {"epochs", hp.epochs},
                           {"inner_steps", hp.inner_steps},
                           {"hidden", hp.hidden},
                           {"tensor_layers", hp.tensor_layers},
                           {"warmup_epochs", hp.warmup_epochs},
                           {"momentum", hp.momentum},
                           {"line_search", hp.line_search},
                           {"pin_noise_once", hp.pin_noise_once},
                           {"min_unique_words", hp.min_unique_words},
                           {"network_enabled", hp.network_enabled}};
    const SynthOptions& s = cfg.synth;
    root["synth"] = {{"legislators", cfg.synth_legislators},
                     {"bills", cfg.synth_bills},
                     {"vocab", cfg.synth_vocab},
                     {"words_per_doc", cfg.synth_words_per_doc},
                     {"eta_max", s.eta_max},
                     {"dirichlet_alpha", s.dirichlet_alpha},
                     {"code_dominance_lo", s.code_dominance_lo},
                     {"code_dominance_hi", s.code_dominance_hi},
                     {"alpha_mean", s.alpha_mean},
                     {"alpha_std", s.alpha_std},
                     {"beta_mean", s.beta_mean},
                     {"beta_std", s.beta_std},
                     {"planted_u0", s.planted_u0},
                     {"planted_u1", s.planted_u1},
                     {"planted_tau", s.planted_tau},
                     {"background_tau_std", s.background_tau_std},
                     {"use_tensor", s.use_tensor}};
    root["sweep"] = {{"lambda_y", cfg.sweep_lambda_y},
                     {"lambda_tau", cfg.sweep_lambda_tau},
                     {"trust_rank", cfg.sweep_trust_rank}};
    root["interpret"] = {{"top_words", cfg.top_words},
                         {"trust_threshold", cfg.trust_threshold},
                         {"party_thresholds", cfg.party_thresholds},
                         {"top_k", cfg.top_k_list},
                         {"bill_dates", cfg.bill_dates_path}};
    root["out"] = cfg.out_dir;
    root["seed"] = cfg.seed;
    root["folds"] = cfg.folds;
    root["checkpoint"] = cfg.checkpoint_path;
    return root.dump(2) + "\n";
}

} // namespace nipen
