#pragma once

#include <string>
#include <vector>

#include "nipen/corpus.hpp"
#include "nipen/votemodel.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Qualitative exports from a trained model: word-topic tables, bill
// profiles, ideal-point scatters, thresholded trust networks and
// content-vs-network scaling rankings. Everything is deterministic; ties
// break by index.
// ---------------------------------------------------------------------------

struct WordTopicEntry {
    int term = 0;
    double score = 0.0;
};

struct WordTopicTable {
    std::vector<std::vector<WordTopicEntry>> topics; // K lists of top_n entries
};

// Topic k's term scores are the decoder image of the unit code e_k; per
// topic the top_n terms by score, ties by term index.
WordTopicTable word_topic_matrix(const AutoencoderParams& ae, int top_n);

struct BillProfile {
    Vector proportions;            // softmax of the code; raw code on failure
    Vector ideal;                  // per-topic bill ideal points a_d
    Vector saliency;               // |a_dk * proportions_k|
    int top_topic = 0;             // argmax saliency, first index on ties
    bool normalization_ok = true;  // false when the code row is all zero
};

BillProfile bill_profile(const Model& model, const DocTermMatrix& docs, int d);

struct ScatterRow {
    int legislator = 0;
    double ideal = 0.0;
    Party party = Party::Other;
};

// One section per topic, one row per legislator, party attached for coloring.
std::vector<std::vector<ScatterRow>> legislator_scatter(
    const Model& model, const std::vector<LegislatorMeta>& meta);

struct TrustEdge {
    int source = 0;
    int target = 0;
    double tau = 0.0;
    int sign = 0; // +1 or -1
};

struct TrustEdgeList {
    double threshold = 0.0;
    std::vector<TrustEdge> edges; // sorted by (source, target)
};

// Directed edges (u, v), v a neighbor of u, with |tau_uv| >= threshold.
TrustEdgeList trust_network(const Model& model, const NeighborSets& neighbors,
                            double threshold);

struct PartyNetworkRow {
    Party party = Party::Other;
    int num_pairs = 0;          // directed within-party neighbor pairs
    std::vector<int> above;     // per threshold t: pairs with tau > +t
    std::vector<int> below;     // per threshold t: pairs with tau < -t
    double mean_abs = 0.0;      // mean |tau| over those pairs
    double var_abs = 0.0;       // population variance of |tau|
};

struct PartyNetworkStats {
    std::vector<double> thresholds;
    std::vector<PartyNetworkRow> rows; // parties present in the metadata
};

PartyNetworkStats party_network_stats(const Model& model,
                                      const std::vector<LegislatorMeta>& meta,
                                      const NeighborSets& neighbors,
                                      const std::vector<double>& thresholds);

struct RankingRow {
    int legislator = 0;
    double value = 0.0; // alpha_u or beta_u
    int rank = 0;       // 1-based position in the |value| ordering
};

struct PartyRankingStats {
    Party party = Party::Other;
    int num_members = 0;
    std::vector<int> nl_at_k;    // members ranked within top K, per requested K
    std::vector<double> ar_at_k; // mean rank of those members; 0 when none
    double ar_all = 0.0;         // mean rank over all members
    double mean_value = 0.0;     // party mean of the signed value
};

struct ScalingReport {
    std::vector<int> top_k_list;
    std::vector<RankingRow> content_ranking; // by |alpha| descending
    std::vector<RankingRow> network_ranking; // by |beta| descending
    std::vector<PartyRankingStats> content_party;
    std::vector<PartyRankingStats> network_party;
};

ScalingReport scaling_rankings(const Model& model, const std::vector<LegislatorMeta>& meta,
                               const std::vector<int>& top_k_list);

struct TimelinePeriod {
    int year = 0;
    int included = 0;        // legislators entering the ratio
    int excluded = 0;        // legislators with |beta| below the floor
    bool has_ratio = false;
    double mean_ratio = 0.0; // mean |alpha/beta| over included legislators
};

// Periods come from bill vote dates when `bill_dates` is non-empty (a
// legislator is active in every year they voted in), otherwise from each
// legislator's term midpoints. The ratio floor excludes |beta| < 1e-6.
std::vector<TimelinePeriod> alpha_beta_timeline(const Model& model,
                                                const std::vector<LegislatorMeta>& meta,
                                                const VoteMatrix& votes,
                                                const std::vector<Date>& bill_dates);

// ---------------------------------------------------------------------------
// CSV renderings (stable headers, %.17g numbers).
// ---------------------------------------------------------------------------

std::string word_topic_csv(const WordTopicTable& table, const std::vector<std::string>* vocab);
std::string bill_profiles_csv(const Model& model, const DocTermMatrix& docs,
                              const IdMap& bill_ids);
std::string scatter_csv(const std::vector<std::vector<ScatterRow>>& sections,
                        const IdMap& legislator_ids);
std::string trust_edges_csv(const TrustEdgeList& edges, const IdMap& legislator_ids);
// Plain "source target weight sign" lines for graph tools.
std::string trust_edges_graph(const TrustEdgeList& edges);
std::string party_stats_csv(const PartyNetworkStats& stats);
std::string rankings_csv(const ScalingReport& report);
std::string timeline_csv(const std::vector<TimelinePeriod>& periods);

} // namespace nipen
