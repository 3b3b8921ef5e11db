#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occnlp/corpus.hpp"
#include "occnlp/matrix.hpp"

namespace occnlp {

struct LdaConfig {
    int n_topics = 40;
    /// Symmetric document-topic prior; 50 / n_topics when unset.
    std::optional<double> alpha;
    /// Symmetric topic-word prior.
    double beta = 0.01;
    int iterations = 1000;
    std::uint64_t seed = 0;

    double effective_alpha() const { return alpha ? *alpha : 50.0 / n_topics; }
    void validate() const;

    bool operator==(const LdaConfig&) const = default;
};

/// Collapsed-Gibbs state of a fitted topic model. The counts of the final
/// sweep define the model; phi and theta are derived from them.
class LdaModel {
public:
    LdaModel() = default;

    /// Rebuilds all count tables from per-token assignments.
    LdaModel(LdaConfig config, std::size_t vocab_size, std::vector<std::string> doc_ids,
             std::vector<std::vector<TokenId>> tokens, std::vector<std::vector<std::int32_t>> assignments);

    const LdaConfig& config() const noexcept { return config_; }
    int n_topics() const noexcept { return config_.n_topics; }
    std::size_t vocab_size() const noexcept { return vocab_size_; }
    std::size_t n_docs() const noexcept { return doc_ids_.size(); }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return config_.beta; }

    std::span<const std::string> doc_ids() const noexcept { return doc_ids_; }
    std::span<const TokenId> tokens(std::size_t d) const { return tokens_.at(d); }
    std::span<const std::int32_t> assignments(std::size_t d) const { return assignments_.at(d); }

    std::int32_t topic_word_count(int k, TokenId v) const {
        return word_topic_(static_cast<std::size_t>(v), static_cast<std::size_t>(k));
    }
    std::int32_t doc_topic_count(std::size_t d, int k) const { return doc_topic_(d, static_cast<std::size_t>(k)); }
    std::int32_t topic_total(int k) const { return topic_totals_.at(static_cast<std::size_t>(k)); }
    std::int64_t total_tokens() const noexcept;

    /// Count table of word v across topics, length K.
    std::span<const std::int32_t> word_topic_row(TokenId v) const { return word_topic_.row(static_cast<std::size_t>(v)); }
    std::span<const std::int32_t> topic_totals() const noexcept { return topic_totals_; }

    /// Empty when every count invariant holds, otherwise a description of the first violation.
    std::string check_invariants() const;

    bool operator==(const LdaModel&) const = default;

private:
    friend class GibbsSampler;

    LdaConfig config_;
    double alpha_ = 0.0;
    std::size_t vocab_size_ = 0;
    std::vector<std::string> doc_ids_;
    std::vector<std::vector<TokenId>> tokens_;
    std::vector<std::vector<std::int32_t>> assignments_;
    Matrix<std::int32_t> word_topic_;  // V x K
    Matrix<std::int32_t> doc_topic_;   // D x K
    std::vector<std::int32_t> topic_totals_;
};

/// Called after every full sweep with the 1-based sweep number.
using SweepObserver = std::function<void(int sweep, const LdaModel& state)>;

/// Fits by collapsed Gibbs sampling. Documents must be non-empty and all
/// token ids must be below vocab_size.
LdaModel fit_gibbs(const Corpus& corpus, std::size_t vocab_size, const LdaConfig& config,
                   const SweepObserver& observer = {});

/// phi[k][v] = (n_kv + beta) / (n_k + V beta)
Matrix<double> phi(const LdaModel& model);
/// theta[d][k] = (n_dk + alpha) / (N_d + K alpha)
Matrix<double> theta(const LdaModel& model);

struct TopWord {
    TokenId id;
    double probability;
};

/// The n most probable words of topic k, descending, ties to the lower id.
std::vector<TopWord> top_words(const LdaModel& model, int k, std::size_t n);

/// Topic distribution of an unseen document by Gibbs fold-in against the
/// fixed topic-word counts. Ids at or above the model vocabulary are dropped.
std::vector<double> infer(const LdaModel& model, std::span<const TokenId> tokens, int iterations, std::uint64_t seed);

/// The n most probable topic ids, descending, ties to the lower id.
std::vector<int> rank_topics(std::span<const double> distribution, std::size_t n);

struct SyntheticSpec {
    int n_topics = 5;
    std::size_t vocab_size = 50;
    std::size_t n_docs = 500;
    double poisson_lambda = 60.0;
    double alpha = 0.5;
    /// Row-stochastic K x V; drawn from Dirichlet(0.1) when absent.
    std::optional<Matrix<double>> true_phi;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticCorpus {
    Corpus corpus;
    Matrix<double> theta;  // D x K
    Matrix<double> phi;    // K x V
    /// Topic drawn for every token, parallel to Document::tokens.
    std::vector<std::vector<std::int32_t>> topics;
};

/// Samples documents from the LDA generative process: length ~ Poisson
/// (redrawn when 0), theta ~ Dirichlet(alpha), topic ~ theta, word ~ phi[topic].
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Token strings "w00", "w01", ... whose lexicographic order matches their ids.
Vocabulary synthetic_vocabulary(std::size_t vocab_size);

/// Versioned JSON. Loading refuses a vocabulary whose hash differs.
std::string save_lda(const LdaModel& model, const Vocabulary& vocab);
LdaModel load_lda(std::string_view text, const Vocabulary& vocab);

}  // namespace occnlp
