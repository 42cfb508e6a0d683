#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nipen/nn.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Votes.
//
// Sparse signed storage: +1 YEA, -1 NAY, absent pair = unobserved. Entries
// are kept sorted by (bill, legislator) so downstream iteration order is
// deterministic.
// ---------------------------------------------------------------------------

struct VoteEntry {
    int legislator = 0;
    int bill = 0;
    int vote = 0; // +1 or -1
};

struct VoteMatrix {
    int num_legislators = 0;
    int num_bills = 0;
    std::vector<VoteEntry> entries;

    // Per-bill observed votes as (legislator, vote) pairs, in entry order.
    std::vector<std::vector<std::pair<int, double>>> by_bill() const;

    // nullopt-free probe: returns 0 when (u, d) is unobserved.
    int vote_at(int legislator, int bill) const;

    void sort_entries();
    void check(const char* what) const; // index ranges, vote values, duplicates
};

// Stable external-id <-> dense-index maps, indices in first-appearance order.
struct IdMap {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> index;

    int add_or_get(const std::string& name);
    int at(const std::string& name) const; // throws DataError when unknown
    int size() const { return static_cast<int>(names.size()); }
};

struct LoadedVotes {
    VoteMatrix votes;
    IdMap legislators;
    IdMap bills;
};

// Rows "legislator_id, bill_id, vote"; vote tokens 1/-1/+1/YEA/NAY, case
// insensitive. Errors carry the line number and offending token.
LoadedVotes load_votes(const std::string& path);
void save_votes(const std::string& path, const VoteMatrix& votes,
                const IdMap& legislators, const IdMap& bills);

// ---------------------------------------------------------------------------
// Bag-of-words documents.
// ---------------------------------------------------------------------------

struct DocTermMatrix {
    int num_docs = 0;
    int vocab_size = 0;
    // Per doc: (term, count) sorted by term; counts are nonnegative reals.
    std::vector<std::vector<std::pair<int, double>>> rows;
    // Docs below the unique-word threshold: excluded from autoencoder terms
    // but kept for vote prediction through their offset alone.
    std::vector<uint8_t> flagged;

    int num_flagged() const;
    int unique_terms(int doc) const { return static_cast<int>(rows[doc].size()); }

    // Rows scaled to [0, 1] by their own max count (all-zero rows stay zero).
    Matrix normalized() const;
};

// Header "D V NNZ" then NNZ lines "doc term count".
DocTermMatrix load_docterm(const std::string& path, int min_unique_words);
void save_docterm(const std::string& path, const DocTermMatrix& docs);

// Recomputes the flagged mask for an in-memory matrix.
void apply_min_words_filter(DocTermMatrix& docs, int min_unique_words);

// ---------------------------------------------------------------------------
// Legislator metadata and neighbor sets.
// ---------------------------------------------------------------------------

enum class Party { Republican, Democrat, Other };
enum class Chamber { House, Senate };

const char* party_name(Party p);
const char* chamber_name(Chamber c);

// Dates are encoded YYYYMMDD; a bare year token parses as January 1st.
using Date = int64_t;
Date parse_date(const std::string& token);
int date_year(Date d);

struct TermInterval {
    Date start = 0;
    Date end = 0;
};

struct LegislatorMeta {
    std::string id;
    Party party = Party::Other;
    Chamber chamber = Chamber::House;
    std::string district;
    std::vector<TermInterval> terms; // one row per term, merged on load
};

// Rows "legislator_id, party, chamber, district, term_start, term_end".
std::vector<LegislatorMeta> load_meta(const std::string& path);
void save_meta(const std::string& path, const std::vector<LegislatorMeta>& meta);

// Reorders parsed metadata to match the vote matrix legislator indices;
// every legislator in the map must have at least one metadata row.
std::vector<LegislatorMeta> align_meta(const std::vector<LegislatorMeta>& meta,
                                       const IdMap& legislators);

// Neighbors are legislators whose term calendars overlap; symmetric, no
// self-loops. Lists are sorted ascending.
struct NeighborSets {
    int num_legislators = 0;
    std::vector<std::vector<int>> lists;
    std::vector<uint8_t> adjacency; // row-major U*U flags

    bool is_neighbor(int u, int v) const {
        return adjacency[static_cast<size_t>(u) * num_legislators + v] != 0;
    }
};

NeighborSets build_neighbor_sets(const std::vector<LegislatorMeta>& meta);

// ---------------------------------------------------------------------------
// Cross-validation splits over observed cells.
// ---------------------------------------------------------------------------

struct CvSplit {
    int folds = 0;
    // fold_entries[f] holds indices into VoteMatrix::entries; the folds
    // partition all entries with sizes differing by at most one.
    std::vector<std::vector<int>> fold_entries;
};

CvSplit make_cv_splits(const VoteMatrix& votes, int folds, uint64_t seed);

// Vote matrix containing every entry except those in the held-out fold.
VoteMatrix training_subset(const VoteMatrix& votes, const CvSplit& split, int held_out_fold);

// ---------------------------------------------------------------------------
// Full corpus bundle.
// ---------------------------------------------------------------------------

struct Corpus {
    VoteMatrix votes;
    DocTermMatrix docs;
    std::vector<LegislatorMeta> meta; // aligned with vote legislator indices
    NeighborSets neighbors;
    IdMap legislator_ids;
    IdMap bill_ids;
};

// Loads and cross-checks the three files. The doc-term doc count must equal
// the number of distinct bills in the vote file; doc index d corresponds to
// the bill with dense index d.
Corpus load_corpus(const std::string& votes_path, const std::string& docs_path,
                   const std::string& meta_path, int min_unique_words);

struct CorpusStats {
    int num_legislators = 0;
    int num_bills = 0;
    int num_votes = 0;
    int num_yea = 0;
    int num_nay = 0;
    int vocab_size = 0;
    int num_flagged_docs = 0;
    double density = 0.0; // observed cells / (U * D)
};

CorpusStats corpus_stats(const Corpus& corpus);

} // namespace nipen
