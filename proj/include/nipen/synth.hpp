#pragma once

#include <cstdint>
#include <vector>

#include "nipen/corpus.hpp"
#include "nipen/objective.hpp"
#include "nipen/votemodel.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Synthetic corpora drawn from known parameters. Votes follow the full
// voting formula; documents come from topic-word mixtures weighted by the
// true codes (the documents have no generative story in the model itself,
// this is purely a test harness).
// ---------------------------------------------------------------------------

struct SynthOptions {
    double eta_max = 0.5;          // bill popularity drawn U(-eta_max, eta_max)
    double dirichlet_alpha = 0.5;  // topic-word symmetric Dirichlet
    double code_dominance_lo = 0.7; // dominant-topic weight range of the codes
    double code_dominance_hi = 0.95;
    double alpha_mean = 1.0; // content scale distribution
    double alpha_std = 0.2;
    double beta_mean = 0.3; // network scale distribution
    double beta_std = 0.1;

    // When planted_u0/u1 are set the trust matrix is stored full rank: one
    // strong directed edge, everything else N(0, background_tau_std^2).
    int planted_u0 = -1;
    int planted_u1 = -1;
    double planted_tau = 0.0;
    double background_tau_std = 0.01;

    bool use_tensor = false;
    TensorComposition composition = TensorComposition::Printed;
};

struct GroundTruth {
    PgmParams pgm;       // bill_offset holds the true offsets, bias the popularity
    TensorParams tensor; // empty unless use_tensor
    bool use_tensor = false;
    TensorComposition composition = TensorComposition::Printed;
    Matrix codes;      // D x K true document codes
    Matrix topic_word; // K x V rows, each summing to 1
    SynthOptions opts;
    uint64_t seed = 0;

    int num_legislators() const { return static_cast<int>(pgm.legislator_ideal.rows()); }
    int num_bills() const { return static_cast<int>(pgm.bill_ideal.rows()); }
    int num_topics() const { return static_cast<int>(pgm.bill_ideal.cols()); }
    int vocab_size() const { return static_cast<int>(topic_word.cols()); }
};

// Latent blocks from their prior scales (ideal points at 1/sqrt(lambda_u),
// offsets at 1/sqrt(lambda_y), trust factors sized so effective entries have
// variance 1/lambda_tau), codes one-hot-dominant, topic-word rows Dirichlet.
GroundTruth sample_ground_truth(int num_legislators, int num_bills, int num_topics,
                                int vocab, int trust_rank, const Hyperparams& hp,
                                uint64_t seed, const SynthOptions& opts = {});

// Dense votes in two passes (pass 1 without the network term, pass 2
// resampling with pass-1 neighbor votes fixed, sharing each cell's uniform
// draw so beta = 0 reproduces pass 1 exactly), words_per_doc tokens per
// document, two parties split by the sign of the first ideal column, one
// shared term so everyone neighbors everyone.
Corpus generate_corpus(const GroundTruth& gt, int words_per_doc, uint64_t seed);

// Vote probabilities under the true parameters, network term read from the
// given context votes (training folds when scoring held-out cells).
std::vector<double> oracle_probs(const GroundTruth& gt, const NeighborSets& neighbors,
                                 const VoteMatrix& context,
                                 const std::vector<std::pair<int, int>>& cells);

// Log-likelihood of the votes under the true parameters, conditioning on the
// votes themselves as network context.
double oracle_loglik(const GroundTruth& gt, const NeighborSets& neighbors,
                     const VoteMatrix& votes);

// Gamma(shape, 1) via Marsaglia-Tsang (kept deterministic across platforms,
// unlike std::gamma_distribution).
double draw_gamma(double shape, std::mt19937_64& rng);

} // namespace nipen
