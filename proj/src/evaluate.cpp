#include "nipen/evaluate.hpp"

#include <cmath>
#include <sstream>

#include "nipen/error.hpp"
#include "nipen/text.hpp"
#include "nipen/trainer.hpp"

namespace nipen {

Metrics compute_metrics(const std::vector<double>& probs, const std::vector<double>& votes) {
    if (probs.size() != votes.size())
        throw Error("compute_metrics: probability/vote length mismatch");
    if (probs.empty()) throw Error("compute_metrics: no cells");

    Metrics m;
    m.n_cells = static_cast<int>(probs.size());
    double sq = 0.0, abs_sum = 0.0, correct = 0.0, nll = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        const double r = votes[i];
        if (!(p >= 0.0 && p <= 1.0))
            throw NumericError("compute_metrics: probability outside [0, 1]");
        if (r != 1.0 && r != -1.0)
            throw DataError("compute_metrics: votes must be +1 or -1");
        const double t = (1.0 + r) / 2.0;
        sq += (p - t) * (p - t);
        abs_sum += std::abs(p - t);
        correct += ((p >= 0.5) == (r > 0.0)) ? 1.0 : 0.0;
        const double pc = std::min(1.0 - 1e-12, std::max(1e-12, p));
        nll -= t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc);
    }
    const double n = static_cast<double>(m.n_cells);
    m.rmse = std::sqrt(sq / n);
    m.mae = abs_sum / n;
    m.accuracy = correct / n;
    m.nall = nll / n;
    return m;
}

CvReport aggregate_folds(std::vector<Metrics> per_fold) {
    if (per_fold.empty()) throw Error("aggregate_folds: no folds");
    CvReport report;
    report.per_fold = std::move(per_fold);

    const auto aggregate = [&](double Metrics::* field, double& mean_out, double& spread_out) {
        double sum = 0.0;
        for (const Metrics& m : report.per_fold) sum += m.*field;
        const double n = static_cast<double>(report.per_fold.size());
        const double mean = sum / n;
        double var = 0.0;
        if (report.per_fold.size() > 1) {
            for (const Metrics& m : report.per_fold) {
                const double d = m.*field - mean;
                var += d * d;
            }
            var /= (n - 1.0); // sample variance over folds
        }
        mean_out = mean;
        spread_out = 2.0 * std::sqrt(var);
    };

    aggregate(&Metrics::rmse, report.mean.rmse, report.spread.rmse);
    aggregate(&Metrics::mae, report.mean.mae, report.spread.mae);
    aggregate(&Metrics::accuracy, report.mean.accuracy, report.spread.accuracy);
    aggregate(&Metrics::nall, report.mean.nall, report.spread.nall);
    for (const Metrics& m : report.per_fold) report.mean.n_cells += m.n_cells;
    report.spread.n_cells = static_cast<int>(report.per_fold.size());
    return report;
}

CvReport cross_validate(const Corpus& corpus, const Hyperparams& hp, ModelVariant variant,
                        TensorComposition comp, int folds, uint64_t seed) {
    hp.validate();
    const CvSplit split = make_cv_splits(corpus.votes, folds, seed);

    std::vector<Metrics> fold_metrics;
    for (int f = 0; f < folds; ++f) {
        const VoteMatrix train_votes = training_subset(corpus.votes, split, f);
        const JointData data = JointData::build(train_votes, corpus.docs, corpus.neighbors);
        const TrainState state =
            train(data, hp, variant, comp, derive_seed(seed, "fold", static_cast<uint64_t>(f)));

        std::vector<std::pair<int, int>> cells;
        std::vector<double> truths;
        for (int idx : split.fold_entries[f]) {
            const VoteEntry& e = corpus.votes.entries[idx];
            cells.emplace_back(e.legislator, e.bill);
            truths.push_back(static_cast<double>(e.vote));
        }
        const std::vector<double> probs =
            predict_matrix(state.model, corpus.docs, train_votes, corpus.neighbors, cells);
        fold_metrics.push_back(compute_metrics(probs, truths));
    }
    return aggregate_folds(std::move(fold_metrics));
}

namespace {

std::string cell_text(double mean, double spread) {
    return format_fixed(mean, 4) + " (±" + format_fixed(spread, 4) + ")";
}

} // namespace

std::string compare_table(const std::vector<std::pair<std::string, CvReport>>& rows) {
    size_t label_w = 8;
    for (const auto& [label, report] : rows) label_w = std::max(label_w, label.size());
    label_w += 2;

    const char* headers[] = {"rmse", "mae", "accuracy", "nall"};
    constexpr size_t col_w = 20;

    std::ostringstream out;
    out << std::string(label_w, ' ');
    for (const char* h : headers) {
        std::string s(h);
        s.resize(col_w, ' ');
        out << s;
    }
    out << "\n";
    for (const auto& [label, report] : rows) {
        std::string l = label;
        l.resize(label_w, ' ');
        out << l;
        const double means[] = {report.mean.rmse, report.mean.mae, report.mean.accuracy,
                                report.mean.nall};
        const double spreads[] = {report.spread.rmse, report.spread.mae,
                                  report.spread.accuracy, report.spread.nall};
        for (int i = 0; i < 4; ++i) {
            std::string s = cell_text(means[i], spreads[i]);
            // The sign takes two bytes in UTF-8; pad on the display width.
            s.append(col_w - std::min(col_w, s.size() - 1), ' ');
            out << s;
        }
        out << "\n";
    }
    return out.str();
}

std::string compare_csv(const std::vector<std::pair<std::string, CvReport>>& rows) {
    std::ostringstream out;
    out << "variant,rmse_mean,rmse_2sigma,mae_mean,mae_2sigma,accuracy_mean,"
           "accuracy_2sigma,nall_mean,nall_2sigma\n";
    for (const auto& [label, report] : rows) {
        out << label << "," << format_g17(report.mean.rmse) << ","
            << format_g17(report.spread.rmse) << "," << format_g17(report.mean.mae) << ","
            << format_g17(report.spread.mae) << "," << format_g17(report.mean.accuracy) << ","
            << format_g17(report.spread.accuracy) << "," << format_g17(report.mean.nall) << ","
            << format_g17(report.spread.nall) << "\n";
    }
    return out.str();
}

} // namespace nipen
