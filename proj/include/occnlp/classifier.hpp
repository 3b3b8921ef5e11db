#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occnlp/corpus.hpp"
#include "occnlp/matrix.hpp"

namespace occnlp {

/// Sparse vector with strictly increasing indices.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::pair<TokenId, double>> entries;

    double dot(std::span<const double> dense) const;
    double squared_norm() const;
    bool operator==(const SparseVector&) const = default;
};

/// Raw term counts times smoothed idf, L2-normalized.
class TfidfFeaturizer {
public:
    TfidfFeaturizer() = default;
    explicit TfidfFeaturizer(std::vector<double> idf);

    /// idf[v] = ln((1 + D) / (1 + df[v])) + 1
    static TfidfFeaturizer from_vocabulary(const Vocabulary& vocab);

    std::size_t dim() const noexcept { return idf_.size(); }
    std::span<const double> idf() const noexcept { return idf_; }

    /// Ids outside [0, dim) are ignored.
    SparseVector featurize(std::span<const TokenId> tokens) const;

private:
    std::vector<double> idf_;
};

struct TrainConfig {
    double l2_lambda = 1e-4;
    double learning_rate = 4.0;
    int epochs = 1000;
    double convergence_tol = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Mean logistic loss of one label plus (lambda / 2) |w|^2. The bias is not penalized.
class BinaryLogisticObjective {
public:
    BinaryLogisticObjective(std::span<const SparseVector> features, std::span<const std::uint8_t> targets,
                            std::size_t dim, double l2_lambda);

    double value(std::span<const double> weights, double bias) const;
    /// Writes d/dw into grad_w and returns d/db.
    double gradient(std::span<const double> weights, double bias, std::span<double> grad_w) const;

    std::size_t dim() const noexcept { return dim_; }

private:
    std::span<const SparseVector> features_;
    std::span<const std::uint8_t> targets_;
    std::size_t dim_;
    double l2_lambda_;
};

struct MultiLabelLinearModel {
    Matrix<double> weights;  // L x V
    std::vector<double> bias;
    std::vector<std::string> label_names;
    double threshold = 0.5;
    std::vector<double> idf;

    std::size_t n_labels() const noexcept { return label_names.size(); }
    std::size_t dim() const noexcept { return weights.cols(); }
    void validate() const;
};

/// Receives (label, epoch, objective value) after each epoch.
using EpochObserver = std::function<void(std::size_t label, int epoch, double loss)>;

/// One-vs-rest L2-regularized logistic regression by full-batch gradient
/// descent. Every label named must be positive in at least one document.
MultiLabelLinearModel train(std::span<const SparseVector> features, std::span<const LabelSet> labels,
                            std::span<const std::string> label_names, const TrainConfig& config,
                            const EpochObserver& observer = {});

double sigmoid(double z) noexcept;

/// Independent per-label sigmoid scores, not normalized across labels.
std::vector<double> predict_proba(const MultiLabelLinearModel& model, const SparseVector& x);

/// Labels whose probability is strictly greater than the threshold.
LabelSet predict_labels(std::span<const double> probabilities, double threshold);

/// Label ids by descending probability, ties to the lower id.
std::vector<LabelId> rank_labels(std::span<const double> probabilities);

std::string save_classifier(const MultiLabelLinearModel& model, const Vocabulary& vocab);
MultiLabelLinearModel load_classifier(std::string_view text, const Vocabulary& vocab);

/// Per-document label scores, e.g. from an external model.
struct ScoreMatrix {
    std::vector<std::string> doc_ids;
    std::vector<std::string> label_names;
    Matrix<double> scores;  // D x L

    /// Rows reordered to follow `ids`, which must all be present.
    ScoreMatrix aligned_to(std::span<const std::string> ids) const;
};

/// CSV with header `doc_id,<label1>,...`. Scores must lie in [0, 1].
ScoreMatrix import_scores(std::istream& in);
ScoreMatrix import_scores(std::string_view text);
std::string export_scores(const ScoreMatrix& scores);

/// Rows of `scores` restricted and reordered to the documents of `corpus`.
/// Every scored id must occur in the corpus.
ScoreMatrix align_scores(const ScoreMatrix& scores, const Corpus& corpus);

}  // namespace occnlp
