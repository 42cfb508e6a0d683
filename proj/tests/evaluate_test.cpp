#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "nipen/error.hpp"
#include "nipen/evaluate.hpp"
#include "nipen/synth.hpp"
#include "nipen/text.hpp"
#include "oracle.hpp"

using namespace nipen;

TEST_CASE("held-out metrics") {
    SUBCASE("a coin-flip predictor") {
        const std::vector<double> probs(4, 0.5);
        const std::vector<double> votes = {1.0, -1.0, 1.0, -1.0};
        const Metrics m = compute_metrics(probs, votes);
        CHECK(m.rmse == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(m.mae == doctest::Approx(0.5).epsilon(1e-15));
        // ties resolve to YEA
        CHECK(m.accuracy == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(m.nall == doctest::Approx(0.69314718055994529).epsilon(1e-12));
        CHECK(m.n_cells == 4);
    }
    SUBCASE("a near-perfect predictor") {
        const std::vector<double> probs = {0.999, 0.001, 0.999};
        const std::vector<double> votes = {1.0, -1.0, 1.0};
        const Metrics m = compute_metrics(probs, votes);
        CHECK(m.accuracy == 1.0);
        CHECK(m.rmse == doctest::Approx(0.001).epsilon(1e-9));
        CHECK(m.mae == doctest::Approx(0.001).epsilon(1e-9));
        CHECK(m.nall == doctest::Approx(-std::log(0.999)).epsilon(1e-9));
    }
    SUBCASE("the four-cell worked example") {
        // probabilities {0.9, 0.2, 0.6, 0.4} against votes {+1, -1, -1, +1};
        // expectations computed independently from the metric formulas
        const std::vector<double> probs = {0.9, 0.2, 0.6, 0.4};
        const std::vector<double> votes = {1.0, -1.0, -1.0, 1.0};
        const Metrics m = compute_metrics(probs, votes);
        CHECK(m.accuracy == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(m.rmse == doctest::Approx(0.43874821936960612).epsilon(1e-15));
        CHECK(m.mae == doctest::Approx(0.375).epsilon(1e-15));
        CHECK(m.nall == doctest::Approx(0.54027138268008645).epsilon(1e-15));
        const oracle::MetricValues want = oracle::metric_values(probs, votes);
        CHECK(m.rmse == doctest::Approx(want.rmse).epsilon(1e-15));
        CHECK(m.mae == doctest::Approx(want.mae).epsilon(1e-15));
        CHECK(m.accuracy == doctest::Approx(want.accuracy).epsilon(1e-15));
        CHECK(m.nall == doctest::Approx(want.nall).epsilon(1e-15));
    }
    SUBCASE("order of the cells is irrelevant") {
        std::mt19937_64 rng(3);
        std::vector<double> probs, votes;
        for (int i = 0; i < 50; ++i) {
            probs.push_back(uniform01(rng));
            votes.push_back(rng() % 2 == 0 ? 1.0 : -1.0);
        }
        const Metrics base = compute_metrics(probs, votes);
        std::vector<int> order(50);
        for (int i = 0; i < 50; ++i) order[i] = i;
        shuffle_indices(order, rng);
        std::vector<double> p2, v2;
        for (int i : order) {
            p2.push_back(probs[i]);
            v2.push_back(votes[i]);
        }
        const Metrics shuffled = compute_metrics(p2, v2);
        CHECK(shuffled.rmse == doctest::Approx(base.rmse).epsilon(1e-12));
        CHECK(shuffled.mae == doctest::Approx(base.mae).epsilon(1e-12));
        CHECK(shuffled.accuracy == base.accuracy);
        CHECK(shuffled.nall == doctest::Approx(base.nall).epsilon(1e-12));
    }
    SUBCASE("accuracy only reads the side of one half") {
        std::mt19937_64 rng(5);
        std::vector<double> probs, votes;
        for (int i = 0; i < 40; ++i) {
            probs.push_back(uniform01(rng));
            votes.push_back(rng() % 2 == 0 ? 1.0 : -1.0);
        }
        // monotone map fixing 0.5: squeeze towards the nearer endpoint
        std::vector<double> squeezed;
        for (double p : probs) squeezed.push_back(0.5 + 0.4 * (p - 0.5));
        CHECK(compute_metrics(squeezed, votes).accuracy ==
              compute_metrics(probs, votes).accuracy);
    }
    SUBCASE("bad input throws") {
        CHECK_THROWS_AS(compute_metrics({}, {}), Error);
        CHECK_THROWS_AS(compute_metrics({0.5, 0.5}, {1.0}), Error);
        CHECK_THROWS_AS(compute_metrics({1.2}, {1.0}), NumericError);
        CHECK_THROWS_AS(compute_metrics({0.5}, {0.0}), DataError);
    }
}

TEST_CASE("fold aggregation") {
    Metrics a;
    a.rmse = 0.4;
    a.mae = 0.3;
    a.accuracy = 0.8;
    a.nall = 0.5;
    a.n_cells = 10;
    Metrics b = a;
    b.rmse = 0.6;
    b.accuracy = 0.9;
    b.n_cells = 12;

    SUBCASE("identical folds have zero spread") {
        const CvReport rep = aggregate_folds({a, a, a});
        CHECK(rep.mean.rmse == doctest::Approx(0.4).epsilon(1e-15));
        // (v+v+v)/3 can land one ulp off v, leaving a ~1e-16 residue.
        CHECK(rep.spread.rmse <= 1e-14);
        CHECK(rep.spread.accuracy <= 1e-14);
        CHECK(rep.mean.n_cells == 30);
        CHECK(rep.spread.n_cells == 3);
    }
    SUBCASE("mean averages, spread is twice the sample deviation") {
        const CvReport rep = aggregate_folds({a, b});
        CHECK(rep.mean.rmse == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(rep.mean.accuracy == doctest::Approx(0.85).epsilon(1e-12));
        // sample sd of {0.4, 0.6} is 0.1414..., doubled
        CHECK(rep.spread.rmse ==
              doctest::Approx(2.0 * std::sqrt(0.02)).epsilon(1e-12));
        CHECK(rep.mean.n_cells == 22);
    }
    SUBCASE("a single fold reports zero spread") {
        const CvReport rep = aggregate_folds({a});
        CHECK(rep.spread.rmse == 0.0);
        CHECK(rep.mean.rmse == a.rmse);
    }
    SUBCASE("no folds is an error") {
        CHECK_THROWS_AS(aggregate_folds({}), Error);
    }
}

TEST_CASE("comparison outputs") {
    Metrics a;
    a.rmse = 0.1753;
    a.mae = 0.12345;
    a.accuracy = 0.87654;
    a.nall = 0.39999;
    a.n_cells = 100;
    Metrics b = a;
    b.rmse = 0.1755;
    CvReport rep = aggregate_folds({a, b});

    SUBCASE("table rows render mean and spread with four decimals") {
        // mean 0.1754; spread 2 * 0.0002 / sqrt(2) = 0.000283
        const std::string table = compare_table({{"pgm-vae", rep}});
        CHECK(table.find("pgm-vae") != std::string::npos);
        CHECK(table.find("rmse") != std::string::npos);
        CHECK(table.find("0.1754 (±0.0003)") != std::string::npos);
        CHECK(table.find("0.8765 (±0.0000)") != std::string::npos);
    }
    SUBCASE("csv re-parses to the same doubles") {
        const std::string csv = compare_csv({{"pgm-vae", rep}, {"tensor", rep}});
        std::istringstream in(csv);
        std::string header, line;
        REQUIRE(std::getline(in, header));
        CHECK(header ==
              "variant,rmse_mean,rmse_2sigma,mae_mean,mae_2sigma,accuracy_mean,"
              "accuracy_2sigma,nall_mean,nall_2sigma");
        REQUIRE(std::getline(in, line));
        const auto fields = split(line, ',');
        REQUIRE(fields.size() == 9);
        CHECK(fields[0] == "pgm-vae");
        CHECK(parse_double(fields[1], "rmse_mean") == rep.mean.rmse);
        CHECK(parse_double(fields[2], "rmse_2sigma") == rep.spread.rmse);
        CHECK(parse_double(fields[7], "nall_mean") == rep.mean.nall);
    }
}

TEST_CASE("cross-validation") {
    Hyperparams hp;
    hp.num_topics = 2;
    hp.trust_rank = 2;
    hp.hidden = {8};
    hp.epochs = 2;
    hp.warmup_epochs = 1;
    hp.min_unique_words = 2;
    const GroundTruth gt = sample_ground_truth(5, 8, 2, 15, 2, hp, 91);
    const Corpus corpus = generate_corpus(gt, 40, 92);

    SUBCASE("two folds, every observed cell scored once") {
        const CvReport rep =
            cross_validate(corpus, hp, ModelVariant::PgmVae, TensorComposition::Printed, 2, 17);
        REQUIRE(rep.per_fold.size() == 2);
        CHECK(rep.mean.n_cells == static_cast<int>(corpus.votes.entries.size()));
        CHECK(rep.spread.n_cells == 2);
        const double mean_rmse = (rep.per_fold[0].rmse + rep.per_fold[1].rmse) / 2.0;
        CHECK(rep.mean.rmse == doctest::Approx(mean_rmse).epsilon(1e-12));
        for (const Metrics& m : rep.per_fold) {
            CHECK(m.rmse > 0.0);
            CHECK(m.rmse < 1.0);
            CHECK(m.nall > 0.0);
        }
    }
    SUBCASE("the same seed reproduces the report") {
        const CvReport r1 =
            cross_validate(corpus, hp, ModelVariant::PgmVae, TensorComposition::Printed, 2, 17);
        const CvReport r2 =
            cross_validate(corpus, hp, ModelVariant::PgmVae, TensorComposition::Printed, 2, 17);
        CHECK(r1.mean.rmse == r2.mean.rmse);
        CHECK(r1.mean.accuracy == r2.mean.accuracy);
        CHECK(r1.per_fold[0].nall == r2.per_fold[0].nall);
    }
}
