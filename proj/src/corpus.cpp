#include "nipen/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nipen/error.hpp"
#include "nipen/text.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// VoteMatrix
// ---------------------------------------------------------------------------

std::vector<std::vector<std::pair<int, double>>> VoteMatrix::by_bill() const {
    std::vector<std::vector<std::pair<int, double>>> out(num_bills);
    for (const VoteEntry& e : entries)
        out[e.bill].emplace_back(e.legislator, static_cast<double>(e.vote));
    return out;
}

int VoteMatrix::vote_at(int legislator, int bill) const {
    const auto cmp = [](const VoteEntry& e, std::pair<int, int> key) {
        return e.bill != key.first ? e.bill < key.first : e.legislator < key.second;
    };
    auto it = std::lower_bound(entries.begin(), entries.end(),
                               std::make_pair(bill, legislator), cmp);
    if (it != entries.end() && it->bill == bill && it->legislator == legislator)
        return it->vote;
    return 0;
}

void VoteMatrix::sort_entries() {
    std::sort(entries.begin(), entries.end(), [](const VoteEntry& a, const VoteEntry& b) {
        return a.bill != b.bill ? a.bill < b.bill : a.legislator < b.legislator;
    });
}

void VoteMatrix::check(const char* what) const {
    std::set<std::pair<int, int>> seen;
    for (const VoteEntry& e : entries) {
        if (e.legislator < 0 || e.legislator >= num_legislators ||
            e.bill < 0 || e.bill >= num_bills)
            throw DataError(std::string(what) + ": vote cell out of range");
        if (e.vote != 1 && e.vote != -1)
            throw DataError(std::string(what) + ": vote value must be +1 or -1");
        if (!seen.emplace(e.legislator, e.bill).second)
            throw DataError(std::string(what) + ": duplicate vote cell (" +
                            std::to_string(e.legislator) + ", " + std::to_string(e.bill) + ")");
    }
}

// ---------------------------------------------------------------------------
// IdMap
// ---------------------------------------------------------------------------

int IdMap::add_or_get(const std::string& name) {
    auto [it, inserted] = index.emplace(name, static_cast<int>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
}

int IdMap::at(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw DataError("unknown id '" + name + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Vote file
// ---------------------------------------------------------------------------

namespace {

int parse_vote_token(const std::string& token, const std::string& context) {
    const std::string t = lower(token);
    if (t == "1" || t == "+1" || t == "yea") return 1;
    if (t == "-1" || t == "nay") return -1;
    throw DataError(context + ": vote token '" + token + "' not in {1, -1, YEA, NAY}");
}

} // namespace

LoadedVotes load_votes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vote file '" + path + "'");

    LoadedVotes out;
    std::set<std::pair<int, int>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string context = path + ":" + std::to_string(lineno);
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3)
            throw DataError(context + ": expected 3 fields, got " + std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty())
            throw DataError(context + ": empty id field");
        const int u = out.legislators.add_or_get(fields[0]);
        const int d = out.bills.add_or_get(fields[1]);
        if (!seen.emplace(u, d).second)
            throw DataError(context + ": duplicate vote for (" + fields[0] + ", " + fields[1] + ")");
        out.votes.entries.push_back({u, d, parse_vote_token(fields[2], context)});
    }
    if (out.votes.entries.empty()) throw DataError(path + ": no vote rows");
    out.votes.num_legislators = out.legislators.size();
    out.votes.num_bills = out.bills.size();
    out.votes.sort_entries();
    return out;
}

void save_votes(const std::string& path, const VoteMatrix& votes,
                const IdMap& legislators, const IdMap& bills) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write vote file '" + path + "'");
    for (const VoteEntry& e : votes.entries)
        outf << legislators.names[e.legislator] << "," << bills.names[e.bill] << ","
             << e.vote << "\n";
}

// ---------------------------------------------------------------------------
// Doc-term file
// ---------------------------------------------------------------------------

DocTermMatrix load_docterm(const std::string& path, int min_unique_words) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open doc-term file '" + path + "'");

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw DataError(path + ": missing header");
    ++lineno;
    {
        std::istringstream hs(line);
        long long d = 0, v = 0, nnz = 0;
        if (!(hs >> d >> v >> nnz) || d <= 0 || v <= 0 || nnz < 0)
            throw DataError(path + ":1: header must be 'D V NNZ' with positive D, V");
        DocTermMatrix docs;
        docs.num_docs = static_cast<int>(d);
        docs.vocab_size = static_cast<int>(v);
        docs.rows.resize(docs.num_docs);

        long long read = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            const std::string context = path + ":" + std::to_string(lineno);
            std::istringstream ls(line);
            long long doc = 0, term = 0;
            double count = 0.0;
            if (!(ls >> doc >> term >> count))
                throw DataError(context + ": expected 'doc term count'");
            std::string rest;
            if (ls >> rest) throw DataError(context + ": trailing token '" + rest + "'");
            if (doc < 0 || doc >= docs.num_docs)
                throw DataError(context + ": doc index " + std::to_string(doc) + " out of range");
            if (term < 0 || term >= docs.vocab_size)
                throw DataError(context + ": term index " + std::to_string(term) + " out of range");
            if (count < 0.0)
                throw DataError(context + ": negative count");
            docs.rows[static_cast<size_t>(doc)].emplace_back(static_cast<int>(term), count);
            ++read;
        }
        if (read != nnz)
            throw DataError(path + ": header promises " + std::to_string(nnz) +
                            " entries, file has " + std::to_string(read));
        for (int d2 = 0; d2 < docs.num_docs; ++d2) {
            auto& row = docs.rows[d2];
            std::sort(row.begin(), row.end());
            for (size_t i = 1; i < row.size(); ++i)
                if (row[i].first == row[i - 1].first)
                    throw DataError(path + ": duplicate (doc " + std::to_string(d2) + ", term " +
                                    std::to_string(row[i].first) + ") entry");
        }
        apply_min_words_filter(docs, min_unique_words);
        return docs;
    }
}

void save_docterm(const std::string& path, const DocTermMatrix& docs) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write doc-term file '" + path + "'");
    size_t nnz = 0;
    for (const auto& row : docs.rows) nnz += row.size();
    outf << docs.num_docs << " " << docs.vocab_size << " " << nnz << "\n";
    for (int d = 0; d < docs.num_docs; ++d)
        for (const auto& [term, count] : docs.rows[d])
            outf << d << " " << term << " " << format_g17(count) << "\n";
}

void apply_min_words_filter(DocTermMatrix& docs, int min_unique_words) {
    docs.flagged.assign(docs.num_docs, 0);
    for (int d = 0; d < docs.num_docs; ++d) {
        int unique = 0;
        for (const auto& [term, count] : docs.rows[d])
            if (count > 0.0) ++unique;
        if (unique < min_unique_words) docs.flagged[d] = 1;
    }
}

int DocTermMatrix::num_flagged() const {
    int n = 0;
    for (uint8_t f : flagged) n += f;
    return n;
}

Matrix DocTermMatrix::normalized() const {
    Matrix out = Matrix::Zero(num_docs, vocab_size);
    for (int d = 0; d < num_docs; ++d) {
        double maxc = 0.0;
        for (const auto& [term, count] : rows[d]) maxc = std::max(maxc, count);
        if (maxc <= 0.0) continue;
        for (const auto& [term, count] : rows[d]) out(d, term) = count / maxc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metadata
// ---------------------------------------------------------------------------

const char* party_name(Party p) {
    switch (p) {
        case Party::Republican: return "Republican";
        case Party::Democrat: return "Democrat";
        case Party::Other: return "Other";
    }
    return "?";
}

const char* chamber_name(Chamber c) {
    return c == Chamber::House ? "House" : "Senate";
}

Date parse_date(const std::string& token) {
    const std::string t = trim(token);
    const std::string context = "date '" + token + "'";
    if (t.find('-') == std::string::npos) {
        const long long v = parse_int(t, context);
        if (v >= 10101) { // compact YYYYMMDD
            const long long m = (v / 100) % 100;
            const long long day = v % 100;
            if (v > 99991231 || m < 1 || m > 12 || day < 1 || day > 31)
                throw DataError(context + ": component out of range");
            return v;
        }
        if (v < 1 || v > 9999) throw DataError(context + ": year out of range");
        return v * 10000 + 101;
    }
    const auto parts = split(t, '-');
    if (parts.size() != 3) throw DataError(context + ": expected YYYY-MM-DD");
    const long long y = parse_int(parts[0], context);
    const long long m = parse_int(parts[1], context);
    const long long d = parse_int(parts[2], context);
    if (y < 1 || y > 9999 || m < 1 || m > 12 || d < 1 || d > 31)
        throw DataError(context + ": component out of range");
    return y * 10000 + m * 100 + d;
}

int date_year(Date d) { return static_cast<int>(d / 10000); }

namespace {

Party parse_party(const std::string& token) {
    const std::string t = lower(token);
    if (t == "r" || t == "rep" || t == "republican") return Party::Republican;
    if (t == "d" || t == "dem" || t == "democrat") return Party::Democrat;
    return Party::Other;
}

Chamber parse_chamber(const std::string& token, const std::string& context) {
    const std::string t = lower(token);
    if (t == "h" || t == "house") return Chamber::House;
    if (t == "s" || t == "senate") return Chamber::Senate;
    throw DataError(context + ": chamber '" + token + "' not in {House, Senate}");
}

} // namespace

std::vector<LegislatorMeta> load_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open metadata file '" + path + "'");

    std::vector<LegislatorMeta> out;
    std::unordered_map<std::string, size_t> by_id;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::string context = path + ":" + std::to_string(lineno);
        const auto fields = split(line, ',');
        if (fields.size() != 6)
            throw DataError(context + ": expected 6 fields, got " + std::to_string(fields.size()));
        if (fields[0].empty()) throw DataError(context + ": empty legislator id");

        const TermInterval term{parse_date(fields[4]), parse_date(fields[5])};
        if (term.end < term.start) throw DataError(context + ": term ends before it starts");

        auto it = by_id.find(fields[0]);
        if (it == by_id.end()) {
            LegislatorMeta m;
            m.id = fields[0];
            m.party = parse_party(fields[1]);
            m.chamber = parse_chamber(fields[2], context);
            m.district = fields[3];
            m.terms.push_back(term);
            by_id.emplace(m.id, out.size());
            out.push_back(std::move(m));
        } else {
            out[it->second].terms.push_back(term);
        }
    }
    if (out.empty()) throw DataError(path + ": no metadata rows");
    return out;
}

void save_meta(const std::string& path, const std::vector<LegislatorMeta>& meta) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write metadata file '" + path + "'");
    for (const LegislatorMeta& m : meta)
        for (const TermInterval& t : m.terms)
            outf << m.id << "," << party_name(m.party) << "," << chamber_name(m.chamber) << ","
                 << m.district << "," << t.start << "," << t.end << "\n";
}

std::vector<LegislatorMeta> align_meta(const std::vector<LegislatorMeta>& meta,
                                       const IdMap& legislators) {
    std::unordered_map<std::string, const LegislatorMeta*> by_id;
    for (const LegislatorMeta& m : meta) by_id.emplace(m.id, &m);
    std::vector<LegislatorMeta> out;
    out.reserve(legislators.size());
    for (const std::string& id : legislators.names) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw DataError("legislator '" + id + "' appears in votes but not in metadata");
        out.push_back(*it->second);
    }
    return out;
}

NeighborSets build_neighbor_sets(const std::vector<LegislatorMeta>& meta) {
    const int n = static_cast<int>(meta.size());
    NeighborSets sets;
    sets.num_legislators = n;
    sets.lists.resize(n);
    sets.adjacency.assign(static_cast<size_t>(n) * n, 0);

    const auto overlaps = [](const LegislatorMeta& a, const LegislatorMeta& b) {
        for (const TermInterval& ta : a.terms)
            for (const TermInterval& tb : b.terms)
                if (ta.start <= tb.end && tb.start <= ta.end) return true;
        return false;
    };

    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (!overlaps(meta[u], meta[v])) continue;
            sets.lists[u].push_back(v);
            sets.lists[v].push_back(u);
            sets.adjacency[static_cast<size_t>(u) * n + v] = 1;
            sets.adjacency[static_cast<size_t>(v) * n + u] = 1;
        }
    }
    for (auto& list : sets.lists) std::sort(list.begin(), list.end());
    return sets;
}

// ---------------------------------------------------------------------------
// Cross-validation splits
// ---------------------------------------------------------------------------

CvSplit make_cv_splits(const VoteMatrix& votes, int folds, uint64_t seed) {
    const int n = static_cast<int>(votes.entries.size());
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (folds > n)
        throw ConfigError("cannot make " + std::to_string(folds) + " folds from " +
                          std::to_string(n) + " observed votes");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng = substream(seed, "corpus-split");
    shuffle_indices(order, rng);

    CvSplit split;
    split.folds = folds;
    split.fold_entries.resize(folds);
    for (int i = 0; i < n; ++i) split.fold_entries[i % folds].push_back(order[i]);
    for (auto& fold : split.fold_entries) std::sort(fold.begin(), fold.end());
    return split;
}

VoteMatrix training_subset(const VoteMatrix& votes, const CvSplit& split, int held_out_fold) {
    if (held_out_fold < 0 || held_out_fold >= split.folds)
        throw ConfigError("held-out fold index out of range");
    std::vector<uint8_t> held(votes.entries.size(), 0);
    for (int idx : split.fold_entries[held_out_fold]) held[idx] = 1;

    VoteMatrix out;
    out.num_legislators = votes.num_legislators;
    out.num_bills = votes.num_bills;
    for (size_t i = 0; i < votes.entries.size(); ++i)
        if (!held[i]) out.entries.push_back(votes.entries[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Bundle
// ---------------------------------------------------------------------------

Corpus load_corpus(const std::string& votes_path, const std::string& docs_path,
                   const std::string& meta_path, int min_unique_words) {
    Corpus corpus;
    LoadedVotes lv = load_votes(votes_path);
    corpus.votes = std::move(lv.votes);
    corpus.legislator_ids = std::move(lv.legislators);
    corpus.bill_ids = std::move(lv.bills);

    corpus.docs = load_docterm(docs_path, min_unique_words);
    if (corpus.docs.num_docs != corpus.votes.num_bills)
        throw DataError("doc-term file has " + std::to_string(corpus.docs.num_docs) +
                        " documents but the vote file names " +
                        std::to_string(corpus.votes.num_bills) + " bills");

    corpus.meta = align_meta(load_meta(meta_path), corpus.legislator_ids);
    corpus.neighbors = build_neighbor_sets(corpus.meta);
    corpus.votes.check("vote matrix");
    return corpus;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats s;
    s.num_legislators = corpus.votes.num_legislators;
    s.num_bills = corpus.votes.num_bills;
    s.num_votes = static_cast<int>(corpus.votes.entries.size());
    for (const VoteEntry& e : corpus.votes.entries)
        (e.vote > 0 ? s.num_yea : s.num_nay) += 1;
    s.vocab_size = corpus.docs.vocab_size;
    s.num_flagged_docs = corpus.docs.num_flagged();
    s.density = static_cast<double>(s.num_votes) /
                (static_cast<double>(s.num_legislators) * s.num_bills);
    return s;
}

} // namespace nipen
