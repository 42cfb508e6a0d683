#include "nipen/synth.hpp"

#include <cmath>
#include <string>

#include "nipen/error.hpp"

namespace nipen {

double draw_gamma(double shape, std::mt19937_64& rng) {
    if (shape <= 0.0) throw ConfigError("draw_gamma: shape must be positive");
    if (shape < 1.0) {
        const double u = uniform01(rng);
        return draw_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = draw_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

namespace {

int draw_categorical(const Vector& weights, std::mt19937_64& rng) {
    const double u = uniform01(rng) * weights.sum();
    double cum = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (u < cum) return i;
    }
    return static_cast<int>(weights.size()) - 1;
}

double gt_content(const GroundTruth& gt, const Matrix& positions, int u, int d) {
    if (gt.use_tensor)
        return tensor_forward(gt.pgm, gt.tensor, gt.codes, gt.composition, u, d).content;
    double dot = 0.0;
    for (int k = 0; k < gt.num_topics(); ++k)
        dot += positions(d, k) * gt.pgm.bill_ideal(d, k) * gt.pgm.legislator_ideal(u, k);
    return dot + gt.pgm.bill_bias[d];
}

} // namespace

GroundTruth sample_ground_truth(int num_legislators, int num_bills, int num_topics,
                                int vocab, int trust_rank, const Hyperparams& hp,
                                uint64_t seed, const SynthOptions& opts) {
    if (num_legislators < 1 || num_bills < 1 || num_topics < 1 || vocab < 1 || trust_rank < 1)
        throw ConfigError("sample_ground_truth: dimensions must be positive");
    if (opts.code_dominance_lo < 0.0 || opts.code_dominance_hi > 1.0 ||
        opts.code_dominance_lo > opts.code_dominance_hi)
        throw ConfigError("sample_ground_truth: code dominance range must sit inside [0, 1]");

    std::mt19937_64 rng = substream(seed, "synth", 0);
    const int U = num_legislators;
    const int D = num_bills;
    const int K = num_topics;

    GroundTruth gt;
    gt.opts = opts;
    gt.seed = seed;
    gt.use_tensor = opts.use_tensor;
    gt.composition = opts.composition;

    const double ideal_std = 1.0 / std::sqrt(hp.lambda_u);
    const double offset_std = 1.0 / std::sqrt(hp.lambda_y);

    PgmParams& p = gt.pgm;
    p.legislator_ideal = ideal_std * draw_normal_matrix(U, K, rng);
    p.bill_ideal = ideal_std * draw_normal_matrix(D, K, rng);
    p.bill_offset = offset_std * draw_normal_matrix(D, K, rng);
    p.bill_bias = Vector(D);
    for (int d = 0; d < D; ++d) p.bill_bias[d] = opts.eta_max * (2.0 * uniform01(rng) - 1.0);
    p.content_scale = Vector(U);
    for (int u = 0; u < U; ++u)
        p.content_scale[u] = opts.alpha_mean + opts.alpha_std * draw_normal(rng);
    p.network_scale = Vector(U);
    for (int u = 0; u < U; ++u)
        p.network_scale[u] = opts.beta_mean + opts.beta_std * draw_normal(rng);

    const bool planted = opts.planted_u0 >= 0 && opts.planted_u1 >= 0;
    if (planted) {
        if (opts.planted_u0 >= U || opts.planted_u1 >= U || opts.planted_u0 == opts.planted_u1)
            throw ConfigError("sample_ground_truth: planted edge endpoints invalid");
        p.trust_full_rank = true;
        p.trust_left = opts.background_tau_std * draw_normal_matrix(U, U, rng);
        p.trust_left(opts.planted_u0, opts.planted_u1) = opts.planted_tau;
        p.trust_right = Matrix::Identity(U, U);
    } else {
        // Factor entries sized so effective tau entries have variance 1/lambda_tau.
        const double factor_std = std::pow(trust_rank * hp.lambda_tau, -0.25);
        p.trust_full_rank = false;
        p.trust_left = factor_std * draw_normal_matrix(U, trust_rank, rng);
        p.trust_right = factor_std * draw_normal_matrix(trust_rank, U, rng);
    }

    gt.codes = Matrix(D, K);
    for (int d = 0; d < D; ++d) {
        if (K == 1) {
            gt.codes(d, 0) = 1.0;
            continue;
        }
        const int dominant = static_cast<int>(uniform01(rng) * K);
        const double w = opts.code_dominance_lo +
                         (opts.code_dominance_hi - opts.code_dominance_lo) * uniform01(rng);
        for (int k = 0; k < K; ++k) gt.codes(d, k) = (1.0 - w) / (K - 1);
        gt.codes(d, dominant) = w;
    }

    gt.topic_word = Matrix(K, vocab);
    for (int k = 0; k < K; ++k) {
        double total = 0.0;
        for (int v = 0; v < vocab; ++v) {
            const double g = draw_gamma(opts.dirichlet_alpha, rng);
            gt.topic_word(k, v) = g;
            total += g;
        }
        gt.topic_word.row(k) /= total;
    }

    if (opts.use_tensor) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(K));
        TensorLayerParams layer;
        layer.weight = scale * draw_normal_matrix(K, K, rng);
        layer.bias = Vector::Zero(K);
        gt.tensor.layers.push_back(std::move(layer));
        gt.tensor.out_weight = scale * draw_normal_vector(K, rng);
        gt.tensor.check_shapes(K);
    }

    p.check_shapes();
    return gt;
}

Corpus generate_corpus(const GroundTruth& gt, int words_per_doc, uint64_t seed) {
    if (words_per_doc < 1) throw ConfigError("generate_corpus: words_per_doc must be positive");
    const int U = gt.num_legislators();
    const int D = gt.num_bills();
    const int V = gt.vocab_size();

    Corpus corpus;
    for (int u = 0; u < U; ++u) corpus.legislator_ids.add_or_get("leg" + std::to_string(u));
    for (int d = 0; d < D; ++d) corpus.bill_ids.add_or_get("bill" + std::to_string(d));

    corpus.meta.resize(U);
    for (int u = 0; u < U; ++u) {
        LegislatorMeta& m = corpus.meta[u];
        m.id = corpus.legislator_ids.names[u];
        m.party = gt.pgm.legislator_ideal(u, 0) >= 0.0 ? Party::Democrat : Party::Republican;
        m.chamber = Chamber::Senate;
        m.district = "SYN-" + std::to_string(u);
        m.terms.push_back({20090101, 20101231}); // one shared term: everyone overlaps
    }
    corpus.neighbors = build_neighbor_sets(corpus.meta);

    std::mt19937_64 doc_rng = substream(seed, "synth", 1);
    corpus.docs.num_docs = D;
    corpus.docs.vocab_size = V;
    corpus.docs.rows.resize(D);
    for (int d = 0; d < D; ++d) {
        std::vector<double> counts(V, 0.0);
        const Vector mix = gt.codes.row(d).transpose();
        for (int w = 0; w < words_per_doc; ++w) {
            const int topic = draw_categorical(mix, doc_rng);
            const int term = draw_categorical(gt.topic_word.row(topic).transpose(), doc_rng);
            counts[term] += 1.0;
        }
        for (int v = 0; v < V; ++v)
            if (counts[v] > 0.0) corpus.docs.rows[d].push_back({v, counts[v]});
    }
    apply_min_words_filter(corpus.docs, 1);

    std::mt19937_64 vote_rng = substream(seed, "synth", 2);
    const Matrix positions = bill_positions(gt.pgm, gt.codes);
    const Matrix tau = effective_tau(gt.pgm);

    Matrix cell_uniform(U, D);
    Matrix content(U, D);
    VoteMatrix pass1;
    pass1.num_legislators = U;
    pass1.num_bills = D;
    for (int d = 0; d < D; ++d) {
        for (int u = 0; u < U; ++u) {
            cell_uniform(u, d) = uniform01(vote_rng);
            content(u, d) = gt_content(gt, positions, u, d);
            const double p = sigmoid(gt.pgm.content_scale[u] * content(u, d));
            pass1.entries.push_back({u, d, cell_uniform(u, d) < p ? 1 : -1});
        }
    }
    pass1.sort_entries();

    const auto pass1_by_bill = pass1.by_bill();
    corpus.votes.num_legislators = U;
    corpus.votes.num_bills = D;
    for (int d = 0; d < D; ++d) {
        for (int u = 0; u < U; ++u) {
            const double net = network_sum(tau, corpus.neighbors, pass1_by_bill[d], u);
            const double logit = gt.pgm.content_scale[u] * content(u, d) +
                                 gt.pgm.network_scale[u] * net;
            corpus.votes.entries.push_back({u, d, cell_uniform(u, d) < sigmoid(logit) ? 1 : -1});
        }
    }
    corpus.votes.sort_entries();
    corpus.votes.check("synthetic votes");
    return corpus;
}

std::vector<double> oracle_probs(const GroundTruth& gt, const NeighborSets& neighbors,
                                 const VoteMatrix& context,
                                 const std::vector<std::pair<int, int>>& cells) {
    const Matrix positions = bill_positions(gt.pgm, gt.codes);
    const Matrix tau = effective_tau(gt.pgm);
    const auto by_bill = context.by_bill();

    std::vector<double> probs;
    probs.reserve(cells.size());
    for (const auto& [u, d] : cells) {
        const double net = network_sum(tau, neighbors, by_bill[d], u);
        const double logit = gt.pgm.content_scale[u] * gt_content(gt, positions, u, d) +
                             gt.pgm.network_scale[u] * net;
        probs.push_back(sigmoid(logit));
    }
    return probs;
}

double oracle_loglik(const GroundTruth& gt, const NeighborSets& neighbors,
                     const VoteMatrix& votes) {
    std::vector<std::pair<int, int>> cells;
    std::vector<double> r;
    cells.reserve(votes.entries.size());
    for (const VoteEntry& e : votes.entries) {
        cells.push_back({e.legislator, e.bill});
        r.push_back(e.vote);
    }
    const std::vector<double> probs = oracle_probs(gt, neighbors, votes, cells);
    return vote_log_likelihood(probs, r, 2.0);
}

} // namespace nipen
