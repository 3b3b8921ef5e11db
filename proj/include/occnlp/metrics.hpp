#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occnlp/classifier.hpp"
#include "occnlp/corpus.hpp"

namespace occnlp {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    bool operator==(const ConfusionCounts&) const = default;
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

struct RankedPrediction {
    std::string doc_id;
    std::vector<LabelId> ranked;
    LabelSet truth;
};

struct AtN {
    double precision = 0.0;
    double recall = 0.0;
    double success = 0.0;
};

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
};

ConfusionCounts confusion_counts(const LabelSet& predicted, const LabelSet& truth);

/// P = tp/(tp+fp), R = tp/(tp+fn); an empty denominator gives 1.
PrecisionRecall precision_recall(const ConfusionCounts& counts);

/// Mean per-document precision over all documents and mean recall over
/// documents with a non-empty true set.
PrecisionRecall macro_precision_recall(std::span<const LabelSet> predicted, std::span<const LabelSet> truth);

/// Per document, with h = |top-n ∩ truth|: P@n = h/n, R@n = h/|truth|,
/// S@n = [h >= 1], averaged over documents with a non-empty true set (0 when
/// there are none). Excluding the same documents from all three keeps
/// P@1 == S@1.
AtN at_n(std::span<const RankedPrediction> predictions, int n);

/// Fraction of documents with a non-empty true set that share at least one label with their prediction.
double success(std::span<const LabelSet> predicted, std::span<const LabelSet> truth);

/// Fraction of documents whose predicted set equals the true set.
double exact_match(std::span<const LabelSet> predicted, std::span<const LabelSet> truth);

/// All length-n windows in order, tokens joined by a single space.
std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t n);

/// Clipped n-gram overlap over candidate (precision) and reference (recall) gram counts.
RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n);

/// Word-level longest common subsequence, O(|a| |b|) time, O(min) memory.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

/// Token rule used for ROUGE: lowercase, edge punctuation stripped, no stemming.
std::vector<std::string> rouge_tokens(std::string_view text);

struct ReportEntry {
    std::string metric;
    double value = 0.0;
    std::size_t n_docs = 0;
};

struct EvalReport {
    std::vector<ReportEntry> entries;
    std::size_t n_docs = 0;

    /// Value of `metric`; throws if absent.
    double at(std::string_view metric) const;
    bool contains(std::string_view metric) const;

    /// `metric,value,n_docs`
    std::string to_csv() const;
    /// Aligned table in the layout of the published result tables.
    std::string to_table() const;
};

struct LabelPrediction {
    std::string doc_id;
    std::vector<double> scores;
    LabelSet truth;
};

struct SummaryPair {
    std::string doc_id;
    std::string candidate;
    std::string reference;
};

/// P@n, R@n, S@n for each cutoff, then EM of the thresholded predictions.
/// Documents must have distinct ids and equally long score vectors.
EvalReport evaluate_labels(std::span<const LabelPrediction> predictions, std::span<const int> cutoffs, double threshold);

/// Macro-averaged R1, R2 and RL precision and recall.
EvalReport evaluate_summaries(std::span<const SummaryPair> pairs);

/// Label rows followed by summary rows; either part may be empty but not both.
EvalReport evaluate(std::span<const LabelPrediction> predictions, std::span<const SummaryPair> summaries,
                    std::span<const int> cutoffs, double threshold);

/// Joins scores to ground truth by document id and label name. True labels
/// absent from the score header get ids past the scored columns so they can
/// never be hit. Throws if a scored id is not in the corpus.
std::vector<LabelPrediction> join_predictions(const Corpus& corpus, const ScoreMatrix& scores);

/// Documents carrying both a generated and a reference summary.
std::vector<SummaryPair> summary_pairs(const Corpus& corpus);

}  // namespace occnlp
