#include <doctest.h>

#include <cmath>
#include <random>

#include "nipen/error.hpp"
#include "nipen/synth.hpp"
#include "oracle.hpp"

using namespace nipen;

namespace {

Hyperparams gen_hp() {
    Hyperparams hp;
    hp.lambda_u = 0.1;
    hp.lambda_y = 10.0;
    hp.lambda_tau = 1.0;
    hp.num_topics = 2;
    hp.trust_rank = 2;
    return hp;
}

// Hand-built truth with every block pinned, for targeted vote checks.
GroundTruth flat_truth(int U, int D, int K, int V, double bias) {
    GroundTruth gt;
    gt.pgm.legislator_ideal = Matrix::Zero(U, K);
    gt.pgm.bill_ideal = Matrix::Zero(D, K);
    gt.pgm.bill_offset = Matrix::Zero(D, K);
    gt.pgm.bill_bias = bias * Vector::Ones(D);
    gt.pgm.content_scale = Vector::Ones(U);
    gt.pgm.network_scale = Vector::Zero(U);
    gt.pgm.trust_left = Matrix::Zero(U, 1);
    gt.pgm.trust_right = Matrix::Zero(1, U);
    gt.codes = Matrix::Constant(D, K, 1.0 / K);
    gt.topic_word = Matrix::Constant(K, V, 1.0 / V);
    return gt;
}

} // namespace

TEST_CASE("ground truth sampling") {
    const Hyperparams hp = gen_hp();

    SUBCASE("seeds reproduce and separate") {
        const GroundTruth a = sample_ground_truth(6, 8, 3, 12, 2, hp, 5);
        const GroundTruth b = sample_ground_truth(6, 8, 3, 12, 2, hp, 5);
        const GroundTruth c = sample_ground_truth(6, 8, 3, 12, 2, hp, 6);
        CHECK((a.pgm.legislator_ideal - b.pgm.legislator_ideal).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.codes - b.codes).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.topic_word - b.topic_word).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.pgm.legislator_ideal - c.pgm.legislator_ideal).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("latent blocks follow their prior scales") {
        const GroundTruth gt = sample_ground_truth(1000, 50, 10, 12, 2, hp, 7);
        const Matrix& x = gt.pgm.legislator_ideal;
        const double var_x = x.squaredNorm() / static_cast<double>(x.size());
        CHECK(var_x == doctest::Approx(1.0 / hp.lambda_u).epsilon(0.1));
        const Matrix& xi = gt.pgm.bill_offset;
        const double var_xi = xi.squaredNorm() / static_cast<double>(xi.size());
        CHECK(var_xi == doctest::Approx(1.0 / hp.lambda_y).epsilon(0.15));
        CHECK(gt.pgm.bill_bias.cwiseAbs().maxCoeff() <= 0.5);
        for (int u = 0; u < 1000; ++u) CHECK(gt.pgm.content_scale[u] > 0.0);
    }
    SUBCASE("codes are dominant-topic mixtures") {
        const GroundTruth gt = sample_ground_truth(4, 40, 5, 12, 2, hp, 9);
        for (int d = 0; d < 40; ++d) {
            CHECK(gt.codes.row(d).sum() == doctest::Approx(1.0).epsilon(1e-12));
            int arg = 0;
            gt.codes.row(d).maxCoeff(&arg);
            const double w = gt.codes(d, arg);
            CHECK(w >= gt.opts.code_dominance_lo);
            CHECK(w <= gt.opts.code_dominance_hi);
            for (int k = 0; k < 5; ++k)
                if (k != arg)
                    CHECK(gt.codes(d, k) == doctest::Approx((1.0 - w) / 4.0).epsilon(1e-12));
        }
    }
    SUBCASE("a single topic degenerates to weight one") {
        Hyperparams one = hp;
        one.num_topics = 1;
        const GroundTruth gt = sample_ground_truth(4, 6, 1, 12, 2, one, 9);
        CHECK((gt.codes - Matrix::Ones(6, 1)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("topic-word rows are distributions") {
        const GroundTruth gt = sample_ground_truth(4, 6, 3, 30, 2, hp, 11);
        for (int k = 0; k < 3; ++k) {
            CHECK(gt.topic_word.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(gt.topic_word.row(k).minCoeff() >= 0.0);
        }
    }
    SUBCASE("a planted trust edge is stored full rank") {
        SynthOptions opts;
        opts.planted_u0 = 1;
        opts.planted_u1 = 3;
        opts.planted_tau = 0.5;
        opts.background_tau_std = 0.01;
        const GroundTruth gt = sample_ground_truth(5, 6, 2, 12, 2, hp, 13, opts);
        CHECK(gt.pgm.trust_full_rank);
        const Matrix tau = effective_tau(gt.pgm);
        CHECK(tau(1, 3) == 0.5);
        for (int u = 0; u < 5; ++u)
            for (int v = 0; v < 5; ++v)
                if (!(u == 1 && v == 3)) CHECK(std::abs(tau(u, v)) < 0.1);
        CHECK((gt.pgm.trust_right - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("tensor truth carries mixing layers") {
        SynthOptions opts;
        opts.use_tensor = true;
        const GroundTruth gt = sample_ground_truth(4, 6, 3, 12, 2, hp, 15, opts);
        REQUIRE(gt.tensor.layers.size() == 1);
        CHECK(gt.tensor.layers[0].weight.rows() == 3);
        CHECK(gt.tensor.out_weight.size() == 3);
        CHECK(gt.use_tensor);
    }
}

TEST_CASE("corpus generation") {
    const Hyperparams hp = gen_hp();
    const GroundTruth gt = sample_ground_truth(6, 8, 2, 15, 2, hp, 21);
    const Corpus corpus = generate_corpus(gt, 40, 22);

    SUBCASE("dimensions, ids and neighbor structure") {
        CHECK(corpus.votes.num_legislators == 6);
        CHECK(corpus.votes.num_bills == 8);
        CHECK(corpus.votes.entries.size() == 48); // dense
        CHECK(corpus.docs.num_docs == 8);
        CHECK(corpus.docs.vocab_size == 15);
        CHECK(corpus.legislator_ids.names[0] == "leg0");
        CHECK(corpus.bill_ids.names[7] == "bill7");
        for (int u = 0; u < 6; ++u) {
            CHECK(corpus.meta[u].chamber == Chamber::Senate);
            CHECK(corpus.meta[u].district == "SYN-" + std::to_string(u));
            CHECK(corpus.neighbors.lists[u].size() == 5); // everyone overlaps
            const Party want = gt.pgm.legislator_ideal(u, 0) >= 0.0 ? Party::Democrat
                                                                    : Party::Republican;
            CHECK(corpus.meta[u].party == want);
        }
    }
    SUBCASE("documents hold exactly words_per_doc tokens") {
        for (int d = 0; d < 8; ++d) {
            double total = 0.0;
            for (const auto& [term, count] : corpus.docs.rows[d]) {
                CHECK(count > 0.0);
                CHECK(count == std::floor(count));
                total += count;
            }
            CHECK(total == 40.0);
        }
        CHECK(corpus.docs.num_flagged() == 0);
    }
    SUBCASE("the corpus seed is reproducible and separate from the truth seed") {
        const Corpus again = generate_corpus(gt, 40, 22);
        CHECK(again.votes.entries.size() == corpus.votes.entries.size());
        for (size_t i = 0; i < corpus.votes.entries.size(); ++i)
            CHECK(again.votes.entries[i].vote == corpus.votes.entries[i].vote);
        CHECK(again.docs.rows == corpus.docs.rows);
        const Corpus other = generate_corpus(gt, 40, 23);
        CHECK(other.docs.rows != corpus.docs.rows);
    }
}

TEST_CASE("vote generation without a network replays its uniforms") {
    // With beta pinned at zero the second pass must reproduce the first, so
    // the votes are an exact function of the per-cell uniform draws.
    Hyperparams hp = gen_hp();
    SynthOptions opts;
    opts.beta_mean = 0.0;
    opts.beta_std = 0.0;
    const GroundTruth gt = sample_ground_truth(5, 7, 2, 12, 2, hp, 31, opts);
    const uint64_t corpus_seed = 32;
    const Corpus corpus = generate_corpus(gt, 30, corpus_seed);

    std::mt19937_64 replay = substream(corpus_seed, "synth", 2);
    for (int d = 0; d < 7; ++d) {
        for (int u = 0; u < 5; ++u) {
            const double uu = uniform01(replay);
            double content = gt.pgm.bill_bias[d];
            for (int k = 0; k < 2; ++k)
                content += (gt.pgm.bill_offset(d, k) + gt.codes(d, k)) *
                           gt.pgm.bill_ideal(d, k) * gt.pgm.legislator_ideal(u, k);
            const double p = oracle::sig(gt.pgm.content_scale[u] * content);
            const int want = uu < p ? 1 : -1;
            CHECK(corpus.votes.vote_at(u, d) == want);
        }
    }
}

TEST_CASE("saturated popularity forces unanimous votes") {
    const GroundTruth gt = flat_truth(3, 4, 2, 6, 50.0);
    const Corpus corpus = generate_corpus(gt, 20, 41);
    for (const VoteEntry& e : corpus.votes.entries) CHECK(e.vote == 1);
    // log sigma(50) is ~ -2e-22, but the likelihood clamps probabilities at
    // 1 - 1e-12, so the 12 cells floor the magnitude near 1.2e-11.
    CHECK(std::abs(oracle_loglik(gt, corpus.neighbors, corpus.votes)) < 1e-10);
}

TEST_CASE("true-parameter likelihood") {
    const Hyperparams hp = gen_hp();

    SUBCASE("matches an explicit transcription") {
        const GroundTruth gt = sample_ground_truth(6, 8, 2, 12, 2, hp, 51);
        const Corpus corpus = generate_corpus(gt, 30, 52);
        const Matrix tau = oracle::tau_product(gt.pgm.trust_left, gt.pgm.trust_right);
        double want = 0.0;
        for (const VoteEntry& e : corpus.votes.entries) {
            double content = gt.pgm.bill_bias[e.bill];
            for (int k = 0; k < 2; ++k)
                content += (gt.pgm.bill_offset(e.bill, k) + gt.codes(e.bill, k)) *
                           gt.pgm.bill_ideal(e.bill, k) *
                           gt.pgm.legislator_ideal(e.legislator, k);
            double net = 0.0;
            for (const VoteEntry& o : corpus.votes.entries)
                if (o.bill == e.bill && o.legislator != e.legislator &&
                    corpus.neighbors.is_neighbor(e.legislator, o.legislator))
                    net += tau(e.legislator, o.legislator) * o.vote;
            const double p = oracle::sig(gt.pgm.content_scale[e.legislator] * content +
                                         gt.pgm.network_scale[e.legislator] * net);
            const double t = (1.0 + e.vote) / 2.0;
            want += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
        const double got = oracle_loglik(gt, corpus.neighbors, corpus.votes);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
    SUBCASE("all-zero parameters price every vote at a half") {
        const GroundTruth gt = flat_truth(3, 4, 2, 6, 0.0);
        const Corpus corpus = generate_corpus(gt, 20, 61);
        const double want = 12.0 * std::log(0.5);
        CHECK(oracle_loglik(gt, corpus.neighbors, corpus.votes) ==
              doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("single-cell probabilities agree with the scalar path") {
        const GroundTruth gt = sample_ground_truth(4, 5, 2, 12, 2, hp, 71);
        const Corpus corpus = generate_corpus(gt, 30, 72);
        const auto probs =
            oracle_probs(gt, corpus.neighbors, corpus.votes, {{2, 3}, {0, 0}});
        REQUIRE(probs.size() == 2);
        for (double p : probs) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("gamma draws") {
    std::mt19937_64 rng(81);
    SUBCASE("moments at shape 2.5") {
        const int n = 20000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = draw_gamma(2.5, rng);
            CHECK(g > 0.0);
            sum += g;
            sumsq += g * g;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        CHECK(mean == doctest::Approx(2.5).epsilon(0.05));
        CHECK(var == doctest::Approx(2.5).epsilon(0.2));
    }
    SUBCASE("the boost branch handles shapes below one") {
        const int n = 20000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = draw_gamma(0.5, rng);
            CHECK(g >= 0.0);
            sum += g;
        }
        CHECK(sum / n == doctest::Approx(0.5).epsilon(0.1));
    }
    SUBCASE("nonpositive shape is rejected") {
        CHECK_THROWS_AS(draw_gamma(0.0, rng), ConfigError);
    }
}
