#include "occnlp/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "occnlp/error.hpp"
#include "occnlp/util.hpp"

namespace occnlp {

ConfusionCounts confusion_counts(const LabelSet& predicted, const LabelSet& truth) {
    ConfusionCounts c;
    for (auto l : predicted) (truth.contains(l) ? c.tp : c.fp)++;
    for (auto l : truth)
        if (!predicted.contains(l)) ++c.fn;
    return c;
}

PrecisionRecall precision_recall(const ConfusionCounts& c) {
    PrecisionRecall pr;
    pr.precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    pr.recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return pr;
}

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw ValidationError("predicted and true label sets differ in count");
}

double mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

PrecisionRecall macro_precision_recall(std::span<const LabelSet> predicted, std::span<const LabelSet> truth) {
    require_same_length(predicted.size(), truth.size());
    double p = 0.0, r = 0.0;
    std::size_t with_truth = 0;
    for (std::size_t d = 0; d < predicted.size(); ++d) {
        auto pr = precision_recall(confusion_counts(predicted[d], truth[d]));
        p += pr.precision;
        if (!truth[d].empty()) {
            r += pr.recall;
            ++with_truth;
        }
    }
    return {mean(p, predicted.size()), mean(r, with_truth)};
}

AtN at_n(std::span<const RankedPrediction> predictions, int n) {
    if (n <= 0) throw ValidationError("cutoff n must be >= 1");
    const auto cutoff = static_cast<std::size_t>(n);
    double p = 0.0, r = 0.0, s = 0.0;
    std::size_t with_truth = 0;
    for (const auto& pred : predictions) {
        auto top = std::min(cutoff, pred.ranked.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < top; ++i)
            if (pred.truth.contains(pred.ranked[i])) ++hits;
        if (pred.truth.empty()) continue;
        p += static_cast<double>(hits) / static_cast<double>(cutoff);
        r += static_cast<double>(hits) / static_cast<double>(pred.truth.size());
        s += hits >= 1 ? 1.0 : 0.0;
        ++with_truth;
    }
    return {mean(p, with_truth), mean(r, with_truth), mean(s, with_truth)};
}

double success(std::span<const LabelSet> predicted, std::span<const LabelSet> truth) {
    require_same_length(predicted.size(), truth.size());
    std::size_t hit = 0, counted = 0;
    for (std::size_t d = 0; d < truth.size(); ++d) {
        if (truth[d].empty()) continue;
        ++counted;
        if (std::any_of(predicted[d].begin(), predicted[d].end(), [&](LabelId l) { return truth[d].contains(l); })) ++hit;
    }
    return mean(static_cast<double>(hit), counted);
}

double exact_match(std::span<const LabelSet> predicted, std::span<const LabelSet> truth) {
    require_same_length(predicted.size(), truth.size());
    std::size_t hit = 0;
    for (std::size_t d = 0; d < truth.size(); ++d)
        if (predicted[d] == truth[d]) ++hit;
    return mean(static_cast<double>(hit), truth.size());
}

// ---------------------------------------------------------------------------
// ROUGE

std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t n) {
    std::vector<std::string> out;
    if (n == 0) throw ValidationError("n-gram order must be >= 1");
    if (tokens.size() < n) return out;
    out.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            g += ' ';
            g += tokens[i + j];
        }
        out.push_back(std::move(g));
    }
    return out;
}

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n) {
    auto cand = ngrams(candidate, n);
    auto ref = ngrams(reference, n);
    std::unordered_map<std::string, std::size_t> ref_counts;
    for (const auto& g : ref) ++ref_counts[g];
    std::size_t overlap = 0;
    for (const auto& g : cand) {
        auto it = ref_counts.find(g);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    RougeScore s;
    if (!cand.empty()) s.precision = static_cast<double>(overlap) / static_cast<double>(cand.size());
    if (!ref.empty()) s.recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
    return s;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
    auto lcs = static_cast<double>(lcs_length(candidate, reference));
    RougeScore s;
    if (!candidate.empty()) s.precision = lcs / static_cast<double>(candidate.size());
    if (!reference.empty()) s.recall = lcs / static_cast<double>(reference.size());
    return s;
}

std::vector<std::string> rouge_tokens(std::string_view text) { return normalize(text, TokenizerConfig{}); }

// ---------------------------------------------------------------------------
// Reports

double EvalReport::at(std::string_view metric) const {
    for (const auto& e : entries)
        if (e.metric == metric) return e.value;
    throw ValidationError("report has no metric " + std::string(metric));
}

bool EvalReport::contains(std::string_view metric) const {
    return std::any_of(entries.begin(), entries.end(), [&](const ReportEntry& e) { return e.metric == metric; });
}

std::string EvalReport::to_csv() const {
    std::string out = "metric,value,n_docs\n";
    for (const auto& e : entries) out += e.metric + "," + format_double(e.value) + "," + std::to_string(e.n_docs) + "\n";
    return out;
}

std::string EvalReport::to_table() const {
    std::size_t width = 6;
    for (const auto& e : entries) width = std::max(width, e.metric.size());
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s\n", static_cast<int>(width), "Metric", "Value", "Docs");
    out += buf;
    out += std::string(width + 20, '-') + "\n";
    std::string group;
    for (const auto& e : entries) {
        // Blank line between metric families (P@, R@, S@, EM, R1, ...).
        auto g = e.metric.substr(0, std::min(e.metric.find_first_of("@."), e.metric.size()));
        if (!group.empty() && g != group) out += "\n";
        group = g;
        std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %8zu\n", static_cast<int>(width), e.metric.c_str(), e.value, e.n_docs);
        out += buf;
    }
    return out;
}

EvalReport evaluate_labels(std::span<const LabelPrediction> predictions, std::span<const int> cutoffs, double threshold) {
    if (cutoffs.empty()) throw ValidationError("at least one cutoff is required");
    std::unordered_set<std::string> ids;
    for (const auto& p : predictions) {
        if (!ids.insert(p.doc_id).second) throw ValidationError("duplicate prediction for document '" + p.doc_id + "'");
        if (p.scores.size() != predictions.front().scores.size())
            throw ValidationError("prediction for '" + p.doc_id + "' has a different label count");
    }

    std::vector<RankedPrediction> ranked;
    std::vector<LabelSet> predicted, truth;
    std::size_t with_truth = 0;
    for (const auto& p : predictions) {
        ranked.push_back({p.doc_id, rank_labels(p.scores), p.truth});
        predicted.push_back(predict_labels(p.scores, threshold));
        truth.push_back(p.truth);
        if (!p.truth.empty()) ++with_truth;
    }

    EvalReport report;
    report.n_docs = predictions.size();
    std::vector<AtN> at;
    for (int n : cutoffs) at.push_back(at_n(ranked, n));
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        report.entries.push_back({"P@" + std::to_string(cutoffs[i]), at[i].precision, with_truth});
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        report.entries.push_back({"R@" + std::to_string(cutoffs[i]), at[i].recall, with_truth});
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        report.entries.push_back({"S@" + std::to_string(cutoffs[i]), at[i].success, with_truth});
    report.entries.push_back({"EM", exact_match(predicted, truth), predictions.size()});
    return report;
}

EvalReport evaluate_summaries(std::span<const SummaryPair> pairs) {
    std::unordered_set<std::string> ids;
    for (const auto& p : pairs)
        if (!ids.insert(p.doc_id).second) throw ValidationError("duplicate summary for document '" + p.doc_id + "'");

    RougeScore r1, r2, rl;
    for (const auto& p : pairs) {
        auto cand = rouge_tokens(p.candidate);
        auto ref = rouge_tokens(p.reference);
        auto a = rouge_n(cand, ref, 1), b = rouge_n(cand, ref, 2), c = rouge_l(cand, ref);
        r1.precision += a.precision, r1.recall += a.recall;
        r2.precision += b.precision, r2.recall += b.recall;
        rl.precision += c.precision, rl.recall += c.recall;
    }
    const auto n = pairs.size();
    EvalReport report;
    report.n_docs = n;
    report.entries = {{"R1.precision", mean(r1.precision, n), n}, {"R1.recall", mean(r1.recall, n), n},
                      {"R2.precision", mean(r2.precision, n), n}, {"R2.recall", mean(r2.recall, n), n},
                      {"RL.precision", mean(rl.precision, n), n}, {"RL.recall", mean(rl.recall, n), n}};
    return report;
}

EvalReport evaluate(std::span<const LabelPrediction> predictions, std::span<const SummaryPair> summaries,
                    std::span<const int> cutoffs, double threshold) {
    if (predictions.empty() && summaries.empty()) throw ValidationError("nothing to evaluate");
    EvalReport report;
    if (!predictions.empty()) report = evaluate_labels(predictions, cutoffs, threshold);
    if (!summaries.empty()) {
        auto s = evaluate_summaries(summaries);
        report.entries.insert(report.entries.end(), s.entries.begin(), s.entries.end());
        report.n_docs = std::max(report.n_docs, s.n_docs);
    }
    return report;
}

std::vector<LabelPrediction> join_predictions(const Corpus& corpus, const ScoreMatrix& scores) {
    auto aligned = align_scores(scores, corpus);
    std::unordered_map<std::string, LabelId> column;
    for (std::size_t c = 0; c < aligned.label_names.size(); ++c) column.emplace(aligned.label_names[c], static_cast<LabelId>(c));
    // Corpus label id -> evaluation label id.
    std::vector<LabelId> remap(corpus.label_names.size());
    auto next = static_cast<LabelId>(aligned.label_names.size());
    for (std::size_t l = 0; l < corpus.label_names.size(); ++l) {
        auto it = column.find(corpus.label_names[l]);
        remap[l] = it != column.end() ? it->second : next++;
    }

    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus.documents) by_id.emplace(d.id, &d);
    std::vector<LabelPrediction> out;
    for (std::size_t r = 0; r < aligned.doc_ids.size(); ++r) {
        const auto& doc = *by_id.at(aligned.doc_ids[r]);
        LabelPrediction p;
        p.doc_id = doc.id;
        p.scores.assign(aligned.scores.row(r).begin(), aligned.scores.row(r).end());
        for (auto l : doc.labels) p.truth.insert(remap.at(static_cast<std::size_t>(l)));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<SummaryPair> summary_pairs(const Corpus& corpus) {
    std::vector<SummaryPair> out;
    for (const auto& d : corpus.documents)
        if (d.generated_summary && d.reference_summary) out.push_back({d.id, *d.generated_summary, *d.reference_summary});
    return out;
}

}  // namespace occnlp
