#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "nipen/corpus.hpp"
#include "nipen/error.hpp"

using namespace nipen;
namespace fs = std::filesystem;

namespace {

// Unique scratch file seeded with the given content.
std::string scratch_file(const std::string& content) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "nipen-corpus-tests";
    fs::create_directories(dir);
    const fs::path p = dir / ("f" + std::to_string(counter++) + ".txt");
    std::ofstream out(p);
    out << content;
    return p.string();
}

} // namespace

TEST_CASE("load_votes") {
    SUBCASE("three rows, two ids each") {
        const LoadedVotes lv =
            load_votes(scratch_file("A,b1,1\nB,b1,-1\nA,b2,+1\n"));
        CHECK(lv.votes.num_legislators == 2);
        CHECK(lv.votes.num_bills == 2);
        CHECK(lv.votes.entries.size() == 3);
        CHECK(lv.legislators.at("A") == 0);
        CHECK(lv.bills.at("b2") == 1);
        CHECK(lv.votes.vote_at(0, 0) == 1);
        CHECK(lv.votes.vote_at(1, 0) == -1);
        CHECK(lv.votes.vote_at(1, 1) == 0); // unobserved
    }
    SUBCASE("vote tokens are case insensitive") {
        const LoadedVotes lv = load_votes(scratch_file("A,b1,YEA\nB,b1,nay\n"));
        CHECK(lv.votes.vote_at(0, 0) == 1);
        CHECK(lv.votes.vote_at(1, 0) == -1);
    }
    SUBCASE("empty file") {
        CHECK_THROWS_WITH_AS(load_votes(scratch_file("")),
                             doctest::Contains("no vote rows"), DataError);
    }
    SUBCASE("duplicate pair names the ids") {
        CHECK_THROWS_WITH_AS(load_votes(scratch_file("A,b1,1\nA,b1,-1\n")),
                             doctest::Contains("duplicate vote for (A, b1)"), DataError);
    }
    SUBCASE("bad token") {
        CHECK_THROWS_WITH_AS(load_votes(scratch_file("A,b1,2\n")),
                             doctest::Contains("'2' not in {1, -1, YEA, NAY}"), DataError);
    }
    SUBCASE("missing file names the path") {
        CHECK_THROWS_WITH_AS(load_votes("/nonexistent/votes.csv"),
                             doctest::Contains("/nonexistent/votes.csv"), DataError);
    }
    SUBCASE("save then load round-trips") {
        const LoadedVotes lv = load_votes(scratch_file("A,b1,1\nB,b1,-1\nA,b2,1\nC,b3,-1\n"));
        const std::string path = scratch_file("");
        save_votes(path, lv.votes, lv.legislators, lv.bills);
        const LoadedVotes re = load_votes(path);
        REQUIRE(re.votes.entries.size() == lv.votes.entries.size());
        for (size_t i = 0; i < lv.votes.entries.size(); ++i) {
            CHECK(re.votes.entries[i].legislator == lv.votes.entries[i].legislator);
            CHECK(re.votes.entries[i].bill == lv.votes.entries[i].bill);
            CHECK(re.votes.entries[i].vote == lv.votes.entries[i].vote);
        }
        CHECK(re.legislators.names == lv.legislators.names);
        CHECK(re.bills.names == lv.bills.names);
    }
}

TEST_CASE("load_docterm") {
    SUBCASE("triplets land in the right cells") {
        const DocTermMatrix docs =
            load_docterm(scratch_file("1 5 2\n0 0 2\n0 3 1\n"), 0);
        CHECK(docs.num_docs == 1);
        CHECK(docs.vocab_size == 5);
        const Matrix row = docs.normalized();
        CHECK(row(0, 0) == 1.0);
        CHECK(row(0, 3) == 0.5);
        CHECK(row(0, 1) == 0.0);
        REQUIRE(docs.rows[0].size() == 2);
        CHECK(docs.rows[0][0] == std::pair<int, double>{0, 2.0});
        CHECK(docs.rows[0][1] == std::pair<int, double>{3, 1.0});
    }
    SUBCASE("nine unique terms flag under a threshold of ten") {
        std::string txt = "1 20 9\n";
        for (int t = 0; t < 9; ++t) txt += "0 " + std::to_string(t) + " 1\n";
        const DocTermMatrix docs = load_docterm(scratch_file(txt), 10);
        CHECK(docs.flagged[0] == 1);
        CHECK(docs.num_flagged() == 1);
    }
    SUBCASE("threshold zero flags nothing") {
        const DocTermMatrix docs = load_docterm(scratch_file("2 4 1\n0 1 3\n"), 0);
        CHECK(docs.num_flagged() == 0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(load_docterm(scratch_file(""), 0), DataError);
        CHECK_THROWS_WITH_AS(load_docterm(scratch_file("0 5 0\n"), 0),
                             doctest::Contains("header"), DataError);
        CHECK_THROWS_WITH_AS(load_docterm(scratch_file("1 5 1\n0 0 -2\n"), 0),
                             doctest::Contains("negative count"), DataError);
        CHECK_THROWS_WITH_AS(load_docterm(scratch_file("1 5 1\n0 7 1\n"), 0),
                             doctest::Contains("term index 7 out of range"), DataError);
        CHECK_THROWS_WITH_AS(load_docterm(scratch_file("1 5 2\n0 0 1\n"), 0),
                             doctest::Contains("promises 2"), DataError);
        CHECK_THROWS_WITH_AS(load_docterm(scratch_file("1 5 2\n0 0 1\n0 0 2\n"), 0),
                             doctest::Contains("duplicate"), DataError);
    }
    SUBCASE("save then load round-trips") {
        const DocTermMatrix docs =
            load_docterm(scratch_file("2 4 3\n0 1 2.5\n0 3 1\n1 2 7\n"), 2);
        const std::string path = scratch_file("");
        save_docterm(path, docs);
        const DocTermMatrix re = load_docterm(path, 2);
        CHECK(re.num_docs == docs.num_docs);
        CHECK(re.vocab_size == docs.vocab_size);
        CHECK(re.rows == docs.rows);
        CHECK(re.flagged == docs.flagged);
    }
    SUBCASE("all-zero rows normalize to zero") {
        const DocTermMatrix docs = load_docterm(scratch_file("2 3 1\n0 1 4\n"), 0);
        CHECK(docs.normalized().row(1).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("dates") {
    CHECK(parse_date("2001") == 20010101);
    CHECK(parse_date("2013-07-04") == 20130704);
    CHECK(parse_date("20090131") == 20090131);
    CHECK(date_year(20130704) == 2013);
    CHECK_THROWS_AS(parse_date("0"), DataError);
    CHECK_THROWS_AS(parse_date("2013-13-01"), DataError);
    CHECK_THROWS_AS(parse_date("20091350"), DataError);
    CHECK_THROWS_AS(parse_date("2013-07"), DataError);
    CHECK_THROWS_AS(parse_date("abc"), Error);
}

TEST_CASE("metadata") {
    SUBCASE("rows merge terms per legislator") {
        const auto meta = load_meta(scratch_file(
            "A,Republican,House,TX-1,2001,2002\nB,D,Senate,NY,2001,2004\nA,R,House,TX-1,2003,2004\n"));
        REQUIRE(meta.size() == 2);
        CHECK(meta[0].id == "A");
        CHECK(meta[0].party == Party::Republican);
        CHECK(meta[0].terms.size() == 2);
        CHECK(meta[1].party == Party::Democrat);
        CHECK(meta[1].chamber == Chamber::Senate);
    }
    SUBCASE("unknown party maps to Other, bad chamber throws") {
        const auto meta = load_meta(scratch_file("A,Independent,House,AK,2001,2002\n"));
        CHECK(meta[0].party == Party::Other);
        CHECK_THROWS_WITH_AS(load_meta(scratch_file("A,R,Congress,AK,2001,2002\n")),
                             doctest::Contains("chamber"), DataError);
    }
    SUBCASE("term ends before it starts") {
        CHECK_THROWS_WITH_AS(load_meta(scratch_file("A,R,House,AK,2004,2001\n")),
                             doctest::Contains("ends before"), DataError);
    }
    SUBCASE("save then load round-trips") {
        const auto meta = load_meta(scratch_file(
            "A,R,House,TX-1,2001-03-04,2002-11-30\nB,D,Senate,NY,2001,2004\n"));
        const std::string path = scratch_file("");
        save_meta(path, meta);
        const auto re = load_meta(path);
        REQUIRE(re.size() == meta.size());
        for (size_t i = 0; i < meta.size(); ++i) {
            CHECK(re[i].id == meta[i].id);
            CHECK(re[i].party == meta[i].party);
            CHECK(re[i].chamber == meta[i].chamber);
            CHECK(re[i].district == meta[i].district);
            REQUIRE(re[i].terms.size() == meta[i].terms.size());
            for (size_t t = 0; t < meta[i].terms.size(); ++t) {
                CHECK(re[i].terms[t].start == meta[i].terms[t].start);
                CHECK(re[i].terms[t].end == meta[i].terms[t].end);
            }
        }
    }
    SUBCASE("align_meta reorders to the vote index order") {
        const auto meta = load_meta(scratch_file(
            "B,D,Senate,NY,2001,2004\nA,R,House,TX,2001,2002\n"));
        IdMap ids;
        ids.add_or_get("A");
        ids.add_or_get("B");
        const auto aligned = align_meta(meta, ids);
        CHECK(aligned[0].id == "A");
        CHECK(aligned[1].id == "B");
        IdMap missing;
        missing.add_or_get("C");
        CHECK_THROWS_WITH_AS(align_meta(meta, missing),
                             doctest::Contains("'C' appears in votes but not in metadata"),
                             DataError);
    }
}

TEST_CASE("neighbor sets") {
    const auto mk = [](Date s, Date e) {
        LegislatorMeta m;
        m.terms.push_back({s, e});
        return m;
    };
    SUBCASE("overlapping terms are mutual neighbors") {
        const NeighborSets nb =
            build_neighbor_sets({mk(20010101, 20031231), mk(20020101, 20041231)});
        CHECK(nb.is_neighbor(0, 1));
        CHECK(nb.is_neighbor(1, 0));
        CHECK(nb.lists[0] == std::vector<int>{1});
    }
    SUBCASE("disjoint terms are not") {
        const NeighborSets nb =
            build_neighbor_sets({mk(20010101, 20021231), mk(20030101, 20041231)});
        CHECK_FALSE(nb.is_neighbor(0, 1));
        CHECK(nb.lists[0].empty());
    }
    SUBCASE("a single legislator has no peers") {
        const NeighborSets nb = build_neighbor_sets({mk(20010101, 20021231)});
        CHECK(nb.lists.size() == 1);
        CHECK(nb.lists[0].empty());
    }
    SUBCASE("symmetry and no self-loops on random intervals") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<LegislatorMeta> meta;
            const int n = 2 + static_cast<int>(rng() % 7);
            for (int i = 0; i < n; ++i) {
                const Date s = 20000101 + static_cast<Date>(rng() % 80000);
                meta.push_back(mk(s, s + static_cast<Date>(rng() % 30000)));
            }
            const NeighborSets nb = build_neighbor_sets(meta);
            for (int u = 0; u < n; ++u) {
                CHECK_FALSE(nb.is_neighbor(u, u));
                for (int v = 0; v < n; ++v)
                    CHECK(nb.is_neighbor(u, v) == nb.is_neighbor(v, u));
            }
        }
    }
}

TEST_CASE("cross-validation splits") {
    VoteMatrix votes;
    votes.num_legislators = 2;
    votes.num_bills = 5;
    const auto fill = [&](int n) {
        votes.entries.clear();
        for (int i = 0; i < n; ++i) votes.entries.push_back({i % 2, i / 2, 1});
    };

    SUBCASE("ten entries over five folds split evenly") {
        fill(10);
        const CvSplit split = make_cv_splits(votes, 5, 42);
        for (const auto& fold : split.fold_entries) CHECK(fold.size() == 2);
    }
    SUBCASE("seven entries over five folds leave sizes {2,2,1,1,1}") {
        fill(7);
        const CvSplit split = make_cv_splits(votes, 5, 42);
        std::vector<size_t> sizes;
        for (const auto& fold : split.fold_entries) sizes.push_back(fold.size());
        std::sort(sizes.begin(), sizes.end(), std::greater<>());
        CHECK(sizes == std::vector<size_t>{2, 2, 1, 1, 1});
    }
    SUBCASE("identical seeds give identical folds") {
        fill(9);
        const CvSplit a = make_cv_splits(votes, 3, 7);
        const CvSplit b = make_cv_splits(votes, 3, 7);
        CHECK(a.fold_entries == b.fold_entries);
        const CvSplit c = make_cv_splits(votes, 3, 8);
        CHECK(a.fold_entries != c.fold_entries);
    }
    SUBCASE("folds partition the entries") {
        fill(10);
        const CvSplit split = make_cv_splits(votes, 4, 3);
        std::vector<int> all;
        for (const auto& fold : split.fold_entries)
            all.insert(all.end(), fold.begin(), fold.end());
        std::sort(all.begin(), all.end());
        REQUIRE(all.size() == 10);
        for (int i = 0; i < 10; ++i) CHECK(all[i] == i);
    }
    SUBCASE("more folds than entries is an error") {
        fill(3);
        CHECK_THROWS_AS(make_cv_splits(votes, 5, 0), ConfigError);
        CHECK_THROWS_AS(make_cv_splits(votes, 1, 0), ConfigError);
    }
    SUBCASE("training subset is the complement of the held-out fold") {
        fill(10);
        const CvSplit split = make_cv_splits(votes, 5, 1);
        const VoteMatrix train = training_subset(votes, split, 2);
        CHECK(train.entries.size() == 8);
        for (int idx : split.fold_entries[2]) {
            const VoteEntry& e = votes.entries[idx];
            CHECK(train.vote_at(e.legislator, e.bill) == 0);
        }
        CHECK_THROWS_AS(training_subset(votes, split, 5), ConfigError);
    }
}

TEST_CASE("vote matrix checks") {
    VoteMatrix votes;
    votes.num_legislators = 2;
    votes.num_bills = 2;
    votes.entries = {{0, 0, 1}, {1, 0, -1}, {0, 1, 1}};
    votes.check("test");

    SUBCASE("by_bill groups in entry order") {
        const auto by_bill = votes.by_bill();
        REQUIRE(by_bill.size() == 2);
        CHECK(by_bill[0].size() == 2);
        CHECK(by_bill[1].size() == 1);
        CHECK(by_bill[0][0] == std::pair<int, double>{0, 1.0});
    }
    SUBCASE("bad cells are rejected") {
        VoteMatrix bad = votes;
        bad.entries.push_back({5, 0, 1});
        CHECK_THROWS_WITH_AS(bad.check("test"), doctest::Contains("out of range"), DataError);
        bad = votes;
        bad.entries.push_back({1, 1, 3});
        CHECK_THROWS_WITH_AS(bad.check("test"), doctest::Contains("+1 or -1"), DataError);
        bad = votes;
        bad.entries.push_back({0, 0, 1});
        CHECK_THROWS_WITH_AS(bad.check("test"), doctest::Contains("duplicate"), DataError);
    }
}

TEST_CASE("full corpus loading") {
    const std::string votes_path = scratch_file("A,b1,1\nB,b1,-1\nA,b2,1\nB,b3,1\nA,b3,-1\n");
    const std::string docs_path =
        scratch_file("3 4 5\n0 0 3\n0 1 1\n1 2 2\n2 1 1\n2 3 5\n");
    const std::string meta_path =
        scratch_file("A,R,House,TX,2001,2002\nB,D,House,NY,2001,2002\n");

    SUBCASE("statistics match hand counts on the three-bill corpus") {
        const Corpus corpus = load_corpus(votes_path, docs_path, meta_path, 2);
        const CorpusStats stats = corpus_stats(corpus);
        CHECK(stats.num_legislators == 2);
        CHECK(stats.num_bills == 3);
        CHECK(stats.num_votes == 5);
        CHECK(stats.num_yea == 3);
        CHECK(stats.num_nay == 2);
        CHECK(stats.vocab_size == 4);
        CHECK(stats.num_flagged_docs == 1); // bill b2 has one unique term
        CHECK(stats.density == doctest::Approx(5.0 / 6.0));
        CHECK(corpus.meta[0].id == "A");
        CHECK(corpus.neighbors.is_neighbor(0, 1));
    }
    SUBCASE("document count must match the bill count") {
        const std::string two_docs = scratch_file("2 4 2\n0 0 3\n1 2 2\n");
        CHECK_THROWS_WITH_AS(load_corpus(votes_path, two_docs, meta_path, 0),
                             doctest::Contains("2 documents"), DataError);
    }
}
