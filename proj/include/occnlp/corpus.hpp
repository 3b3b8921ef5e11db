#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace occnlp {

using TokenId = std::int32_t;
using LabelId = int;
using LabelSet = std::set<LabelId>;

/// One occurrence report.
struct Document {
    std::string id;
    std::string text;
    std::vector<TokenId> tokens;
    LabelSet labels;
    std::optional<std::string> reference_summary;
    std::optional<std::string> generated_summary;
    /// "train", "val", "test" once split; empty before.
    std::string split;

    bool operator==(const Document&) const = default;
};

/// Documents plus the label-name table their label ids index into.
struct Corpus {
    std::vector<Document> documents;
    std::vector<std::string> label_names;

    std::size_t size() const noexcept { return documents.size(); }
    bool empty() const noexcept { return documents.empty(); }
};

struct TokenizerConfig {
    bool lowercase = true;
    bool strip_punctuation = true;
    std::set<std::string> stopwords;
    int min_token_count = 1;
    double max_doc_fraction = 1.0;

    /// Throws ValidationError when a field is out of range.
    void validate() const;
    /// Fingerprint recorded in the vocabulary file header.
    std::uint64_t fingerprint() const;
};

/// Bidirectional token/id map. Ids are dense and follow lexicographic token order.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> tokens, std::vector<std::int64_t> doc_freq, std::int64_t n_docs,
               std::uint64_t config_fingerprint = 0);

    std::size_t size() const noexcept { return tokens_.size(); }
    std::optional<TokenId> find(std::string_view token) const;
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::int64_t doc_freq(TokenId id) const { return doc_freq_.at(static_cast<std::size_t>(id)); }
    std::span<const std::string> tokens() const noexcept { return tokens_; }
    std::span<const std::int64_t> doc_freqs() const noexcept { return doc_freq_; }
    /// Number of documents the frequencies were counted over.
    std::int64_t n_docs() const noexcept { return n_docs_; }
    std::uint64_t config_fingerprint() const noexcept { return config_fingerprint_; }

    /// Identity of the token/id mapping; model files are bound to it.
    std::uint64_t hash() const;

    /// Text format: a header line, then `token<TAB>doc_freq` for id 0, 1, ...
    std::string serialize() const;
    static Vocabulary parse(std::string_view text);

private:
    std::vector<std::string> tokens_;
    std::vector<std::int64_t> doc_freq_;
    std::unordered_map<std::string, TokenId> index_;
    std::int64_t n_docs_ = 0;
    std::uint64_t config_fingerprint_ = 0;
};

struct SplitSpec {
    double train = 0.85;
    double validation = 0.05;
    double test = 0.10;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    Corpus train;
    Corpus validation;
    Corpus test;
};

enum class RequiredField { text, labels, reference_summary };

/// Reads line-delimited JSON records. Labels are interned in first-seen order.
/// Blank lines are skipped; unknown fields are ignored.
Corpus parse_jsonl(std::istream& in);
Corpus parse_jsonl(std::string_view text);

/// Serializes with label names, plus `tokens` and `split` where present.
std::string to_jsonl(const Corpus& corpus);

std::vector<std::string> normalize(std::string_view text, const TokenizerConfig& config);

Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config);

/// Token ids for the normalized text; out-of-vocabulary tokens are dropped.
std::vector<TokenId> encode(std::string_view text, const Vocabulary& vocab, const TokenizerConfig& config);
std::vector<std::string> decode(std::span<const TokenId> ids, const Vocabulary& vocab);

/// Fills Document::tokens for every document.
void encode_corpus(Corpus& corpus, const Vocabulary& vocab, const TokenizerConfig& config);

/// Keeps the first document of each group with identical normalized text.
Corpus dedup(const Corpus& corpus, const TokenizerConfig& config);

Corpus filter_missing(const Corpus& corpus, std::span<const RequiredField> required);

/// Drops documents with more than `max_tokens` tokens.
Corpus filter_max_length(const Corpus& corpus, std::size_t max_tokens);

/// Seeded shuffle, then floor cuts at N*train and N*(train+validation).
SplitResult split(const Corpus& corpus, const SplitSpec& spec);

/// Split slice sizes (train, validation, test) for a corpus of n documents.
std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n, const SplitSpec& spec);

/// Same documents in their original order, each tagged with its split name.
Corpus annotate_split(const Corpus& corpus, const SplitSpec& spec);

/// Documents whose split tag equals `name`, sharing the label table.
Corpus select_split(const Corpus& corpus, std::string_view name);

}  // namespace occnlp
