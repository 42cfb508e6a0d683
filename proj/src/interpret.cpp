#include "nipen/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "nipen/error.hpp"
#include "nipen/text.hpp"

namespace nipen {

WordTopicTable word_topic_matrix(const AutoencoderParams& ae, int top_n) {
    if (top_n < 1) throw ConfigError("word_topic_matrix: top_n must be positive");
    const int K = static_cast<int>(ae.code_head.bias.size());
    const Matrix scores = decode(ae, Matrix::Identity(K, K));
    const int V = static_cast<int>(scores.cols());
    const int n = std::min(top_n, V);

    WordTopicTable table;
    table.topics.resize(K);
    std::vector<int> order(V);
    for (int k = 0; k < K; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (scores(k, a) != scores(k, b)) return scores(k, a) > scores(k, b);
            return a < b;
        });
        for (int i = 0; i < n; ++i)
            table.topics[k].push_back({order[i], scores(k, order[i])});
    }
    return table;
}

BillProfile bill_profile(const Model& model, const DocTermMatrix& docs, int d) {
    if (d < 0 || d >= docs.num_docs) throw DataError("bill_profile: bill index out of range");
    const Matrix z = extract_topics(model.ae, docs);
    const int K = static_cast<int>(z.cols());

    BillProfile profile;
    profile.ideal = model.pgm.bill_ideal.row(d).transpose();
    const Vector code = z.row(d).transpose();
    if (code.isZero(0.0)) {
        profile.normalization_ok = false;
        profile.proportions = code;
    } else {
        const Vector shifted = (code.array() - code.maxCoeff()).exp();
        profile.proportions = shifted / shifted.sum();
    }
    profile.saliency = (profile.ideal.array() * profile.proportions.array()).abs();
    profile.top_topic = 0;
    for (int k = 1; k < K; ++k)
        if (profile.saliency[k] > profile.saliency[profile.top_topic]) profile.top_topic = k;
    return profile;
}

std::vector<std::vector<ScatterRow>> legislator_scatter(
    const Model& model, const std::vector<LegislatorMeta>& meta) {
    const int U = model.pgm.num_legislators();
    const int K = model.pgm.num_topics();
    if (static_cast<int>(meta.size()) != U)
        throw DataError("legislator_scatter: metadata rows do not match the model");

    std::vector<std::vector<ScatterRow>> sections(K);
    for (int k = 0; k < K; ++k) {
        sections[k].reserve(U);
        for (int u = 0; u < U; ++u)
            sections[k].push_back({u, model.pgm.legislator_ideal(u, k), meta[u].party});
    }
    return sections;
}

TrustEdgeList trust_network(const Model& model, const NeighborSets& neighbors,
                            double threshold) {
    if (threshold < 0.0) throw ConfigError("trust_network: threshold must be nonnegative");
    const Matrix tau = effective_tau(model.pgm);

    TrustEdgeList list;
    list.threshold = threshold;
    for (int u = 0; u < neighbors.num_legislators; ++u) {
        for (int v : neighbors.lists[u]) {
            const double t = tau(u, v);
            if (std::abs(t) < threshold) continue;
            list.edges.push_back({u, v, t, t >= 0.0 ? 1 : -1});
        }
    }
    return list;
}

namespace {

std::vector<Party> parties_present(const std::vector<LegislatorMeta>& meta) {
    std::vector<Party> order = {Party::Republican, Party::Democrat, Party::Other};
    std::vector<Party> present;
    for (Party p : order)
        for (const LegislatorMeta& m : meta)
            if (m.party == p) {
                present.push_back(p);
                break;
            }
    return present;
}

} // namespace

PartyNetworkStats party_network_stats(const Model& model,
                                      const std::vector<LegislatorMeta>& meta,
                                      const NeighborSets& neighbors,
                                      const std::vector<double>& thresholds) {
    if (static_cast<int>(meta.size()) != neighbors.num_legislators)
        throw DataError("party_network_stats: metadata rows do not match neighbor sets");
    const Matrix tau = effective_tau(model.pgm);
    const size_t T = thresholds.size();

    PartyNetworkStats stats;
    stats.thresholds = thresholds;
    for (Party p : parties_present(meta)) {
        PartyNetworkRow row;
        row.party = p;
        row.above.assign(T, 0);
        row.below.assign(T, 0);
        double sum = 0.0, sum_sq = 0.0;
        for (int u = 0; u < neighbors.num_legislators; ++u) {
            if (meta[u].party != p) continue;
            for (int v : neighbors.lists[u]) {
                if (meta[v].party != p) continue;
                const double t = tau(u, v);
                row.num_pairs += 1;
                sum += std::abs(t);
                sum_sq += t * t;
                for (size_t i = 0; i < T; ++i) {
                    if (t > thresholds[i]) row.above[i] += 1;
                    if (t < -thresholds[i]) row.below[i] += 1;
                }
            }
        }
        if (row.num_pairs > 0) {
            row.mean_abs = sum / row.num_pairs;
            row.var_abs = sum_sq / row.num_pairs - row.mean_abs * row.mean_abs;
            row.var_abs = std::max(0.0, row.var_abs);
        }
        stats.rows.push_back(std::move(row));
    }
    return stats;
}

namespace {

std::vector<RankingRow> rank_by_magnitude(const Vector& values) {
    const int U = static_cast<int>(values.size());
    std::vector<int> order(U);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = std::abs(values[a]), mb = std::abs(values[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    std::vector<RankingRow> rows(U);
    for (int i = 0; i < U; ++i) rows[i] = {order[i], values[order[i]], i + 1};
    return rows;
}

std::vector<PartyRankingStats> party_ranking_stats(const std::vector<RankingRow>& ranking,
                                                   const std::vector<LegislatorMeta>& meta,
                                                   const std::vector<int>& top_k_list) {
    std::vector<PartyRankingStats> out;
    for (Party p : parties_present(meta)) {
        PartyRankingStats s;
        s.party = p;
        double rank_sum = 0.0, value_sum = 0.0;
        for (const RankingRow& row : ranking) {
            if (meta[row.legislator].party != p) continue;
            s.num_members += 1;
            rank_sum += row.rank;
            value_sum += row.value;
        }
        s.ar_all = s.num_members > 0 ? rank_sum / s.num_members : 0.0;
        s.mean_value = s.num_members > 0 ? value_sum / s.num_members : 0.0;
        for (int k : top_k_list) {
            int count = 0;
            double top_rank_sum = 0.0;
            for (const RankingRow& row : ranking) {
                if (row.rank > k) break;
                if (meta[row.legislator].party != p) continue;
                count += 1;
                top_rank_sum += row.rank;
            }
            s.nl_at_k.push_back(count);
            s.ar_at_k.push_back(count > 0 ? top_rank_sum / count : 0.0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

ScalingReport scaling_rankings(const Model& model, const std::vector<LegislatorMeta>& meta,
                               const std::vector<int>& top_k_list) {
    if (static_cast<int>(meta.size()) != model.pgm.num_legislators())
        throw DataError("scaling_rankings: metadata rows do not match the model");
    for (int k : top_k_list)
        if (k < 1) throw ConfigError("scaling_rankings: top-k values must be positive");

    ScalingReport report;
    report.top_k_list = top_k_list;
    report.content_ranking = rank_by_magnitude(model.pgm.content_scale);
    report.network_ranking = rank_by_magnitude(model.pgm.network_scale);
    report.content_party = party_ranking_stats(report.content_ranking, meta, top_k_list);
    report.network_party = party_ranking_stats(report.network_ranking, meta, top_k_list);
    return report;
}

std::vector<TimelinePeriod> alpha_beta_timeline(const Model& model,
                                                const std::vector<LegislatorMeta>& meta,
                                                const VoteMatrix& votes,
                                                const std::vector<Date>& bill_dates) {
    const int U = model.pgm.num_legislators();
    if (static_cast<int>(meta.size()) != U)
        throw DataError("alpha_beta_timeline: metadata rows do not match the model");
    if (!bill_dates.empty() && static_cast<int>(bill_dates.size()) != votes.num_bills)
        throw DataError("alpha_beta_timeline: one date per bill required");

    // Year -> active legislators.
    std::map<int, std::set<int>> active;
    if (!bill_dates.empty()) {
        for (const VoteEntry& e : votes.entries)
            active[date_year(bill_dates[e.bill])].insert(e.legislator);
    } else {
        for (int u = 0; u < U; ++u)
            for (const TermInterval& term : meta[u].terms)
                active[(date_year(term.start) + date_year(term.end)) / 2].insert(u);
    }

    constexpr double kBetaFloor = 1e-6;
    std::vector<TimelinePeriod> periods;
    for (const auto& [year, members] : active) {
        TimelinePeriod p;
        p.year = year;
        double sum = 0.0;
        for (int u : members) {
            const double beta = model.pgm.network_scale[u];
            if (std::abs(beta) < kBetaFloor) {
                p.excluded += 1;
                continue;
            }
            p.included += 1;
            sum += std::abs(model.pgm.content_scale[u] / beta);
        }
        if (p.included > 0) {
            p.has_ratio = true;
            p.mean_ratio = sum / p.included;
        }
        periods.push_back(std::move(p));
    }
    return periods;
}

// ---------------------------------------------------------------------------
// CSV renderings.
// ---------------------------------------------------------------------------

std::string word_topic_csv(const WordTopicTable& table, const std::vector<std::string>* vocab) {
    std::ostringstream out;
    out << "topic,rank,term,score\n";
    for (size_t k = 0; k < table.topics.size(); ++k)
        for (size_t i = 0; i < table.topics[k].size(); ++i) {
            const WordTopicEntry& e = table.topics[k][i];
            out << k << "," << (i + 1) << ",";
            if (vocab != nullptr && e.term < static_cast<int>(vocab->size()))
                out << (*vocab)[e.term];
            else
                out << "term" << e.term;
            out << "," << format_g17(e.score) << "\n";
        }
    return out.str();
}

std::string bill_profiles_csv(const Model& model, const DocTermMatrix& docs,
                              const IdMap& bill_ids) {
    std::ostringstream out;
    out << "bill,topic,proportion,ideal,saliency,top_topic,normalized\n";
    for (int d = 0; d < docs.num_docs; ++d) {
        const BillProfile p = bill_profile(model, docs, d);
        for (int k = 0; k < p.proportions.size(); ++k)
            out << bill_ids.names[d] << "," << k << "," << format_g17(p.proportions[k]) << ","
                << format_g17(p.ideal[k]) << "," << format_g17(p.saliency[k]) << ","
                << p.top_topic << "," << (p.normalization_ok ? 1 : 0) << "\n";
    }
    return out.str();
}

std::string scatter_csv(const std::vector<std::vector<ScatterRow>>& sections,
                        const IdMap& legislator_ids) {
    std::ostringstream out;
    out << "topic,legislator,ideal,party\n";
    for (size_t k = 0; k < sections.size(); ++k)
        for (const ScatterRow& row : sections[k])
            out << k << "," << legislator_ids.names[row.legislator] << ","
                << format_g17(row.ideal) << "," << party_name(row.party) << "\n";
    return out.str();
}

std::string trust_edges_csv(const TrustEdgeList& edges, const IdMap& legislator_ids) {
    std::ostringstream out;
    out << "source,target,tau,sign\n";
    for (const TrustEdge& e : edges.edges)
        out << legislator_ids.names[e.source] << "," << legislator_ids.names[e.target] << ","
            << format_g17(e.tau) << "," << e.sign << "\n";
    return out.str();
}

std::string trust_edges_graph(const TrustEdgeList& edges) {
    std::ostringstream out;
    for (const TrustEdge& e : edges.edges)
        out << e.source << " " << e.target << " " << format_g17(e.tau) << " " << e.sign
            << "\n";
    return out.str();
}

std::string party_stats_csv(const PartyNetworkStats& stats) {
    std::ostringstream out;
    out << "party,num_pairs";
    for (double t : stats.thresholds)
        out << ",above_" << format_fixed(t, 2) << ",below_" << format_fixed(t, 2);
    out << ",mean_abs_tau,var_abs_tau\n";
    for (const PartyNetworkRow& row : stats.rows) {
        out << party_name(row.party) << "," << row.num_pairs;
        for (size_t i = 0; i < stats.thresholds.size(); ++i)
            out << "," << row.above[i] << "," << row.below[i];
        out << "," << format_g17(row.mean_abs) << "," << format_g17(row.var_abs) << "\n";
    }
    return out.str();
}

std::string rankings_csv(const ScalingReport& report) {
    std::ostringstream out;
    out << "section,rank,legislator,value\n";
    for (const RankingRow& row : report.content_ranking)
        out << "content," << row.rank << "," << row.legislator << ","
            << format_g17(row.value) << "\n";
    for (const RankingRow& row : report.network_ranking)
        out << "network," << row.rank << "," << row.legislator << ","
            << format_g17(row.value) << "\n";

    out << "\nsection,party,members";
    for (int k : report.top_k_list) out << ",nl_at_" << k << ",ar_at_" << k;
    out << ",ar_all,mean_value\n";
    const auto emit = [&](const char* section, const std::vector<PartyRankingStats>& rows) {
        for (const PartyRankingStats& s : rows) {
            out << section << "," << party_name(s.party) << "," << s.num_members;
            for (size_t i = 0; i < report.top_k_list.size(); ++i)
                out << "," << s.nl_at_k[i] << "," << format_g17(s.ar_at_k[i]);
            out << "," << format_g17(s.ar_all) << "," << format_g17(s.mean_value) << "\n";
        }
    };
    emit("content", report.content_party);
    emit("network", report.network_party);
    return out.str();
}

std::string timeline_csv(const std::vector<TimelinePeriod>& periods) {
    std::ostringstream out;
    out << "year,included,excluded,has_ratio,mean_abs_ratio\n";
    for (const TimelinePeriod& p : periods)
        out << p.year << "," << p.included << "," << p.excluded << "," << (p.has_ratio ? 1 : 0)
            << "," << (p.has_ratio ? format_g17(p.mean_ratio) : std::string()) << "\n";
    return out.str();
}

} // namespace nipen
