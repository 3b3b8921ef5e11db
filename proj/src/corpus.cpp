#include "occnlp/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "occnlp/error.hpp"
#include "occnlp/util.hpp"

namespace occnlp {

using nlohmann::json;

void TokenizerConfig::validate() const {
    if (min_token_count < 1) throw ValidationError("min_token_count must be >= 1");
    if (!(max_doc_fraction > 0.0 && max_doc_fraction <= 1.0))
        throw ValidationError("max_doc_fraction must be in (0, 1]");
}

std::uint64_t TokenizerConfig::fingerprint() const {
    Fnv1a h;
    h.update(lowercase ? "lc1" : "lc0").update(strip_punctuation ? "sp1" : "sp0");
    h.update("min=" + std::to_string(min_token_count)).update("max=" + format_double(max_doc_fraction));
    for (const auto& s : stopwords) h.update("\x1f").update(s);
    return h.digest();
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::int64_t> doc_freq, std::int64_t n_docs,
                       std::uint64_t config_fingerprint)
    : tokens_(std::move(tokens)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs),
      config_fingerprint_(config_fingerprint) {
    if (tokens_.size() != doc_freq_.size()) throw ValidationError("vocabulary: token and frequency counts differ");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].empty()) throw ValidationError("vocabulary: empty token");
        if (doc_freq_[i] < 0 || doc_freq_[i] > n_docs_)
            throw ValidationError("vocabulary: document frequency out of range for '" + tokens_[i] + "'");
        if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
            throw ValidationError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t Vocabulary::hash() const {
    Fnv1a h;
    for (const auto& t : tokens_) h.update(t).update("\n");
    return h.digest();
}

namespace {
constexpr std::string_view kVocabMagic = "#occnlp-vocab";
}

std::string Vocabulary::serialize() const {
    std::string out;
    out += kVocabMagic;
    out += " version=1 docs=" + std::to_string(n_docs_) + " config=" + to_hex(config_fingerprint_) + "\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        out += tokens_[i];
        out += '\t';
        out += std::to_string(doc_freq_[i]);
        out += '\n';
    }
    return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || !line.starts_with(kVocabMagic)) throw ParseError(1, "missing vocabulary header");

    std::int64_t n_docs = -1;
    std::uint64_t config = 0;
    bool versioned = false;
    std::istringstream header(line.substr(kVocabMagic.size()));
    for (std::string field; header >> field;) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError(1, "bad header field '" + field + "'");
        auto key = field.substr(0, eq), value = field.substr(eq + 1);
        try {
            if (key == "version") {
                if (value != "1") throw ParseError(1, "unsupported vocabulary version " + value);
                versioned = true;
            } else if (key == "docs") {
                n_docs = std::stoll(value);
            } else if (key == "config") {
                config = std::stoull(value, nullptr, 16);
            }
        } catch (const std::logic_error&) {
            throw ParseError(1, "bad header value '" + field + "'");
        }
    }
    if (!versioned || n_docs < 0) throw ParseError(1, "incomplete vocabulary header");

    std::vector<std::string> tokens;
    std::vector<std::int64_t> df;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError(lineno, "expected token<TAB>doc_freq");
        tokens.push_back(line.substr(0, tab));
        try {
            std::size_t used = 0;
            df.push_back(std::stoll(line.substr(tab + 1), &used));
            if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
        } catch (const std::logic_error&) {
            throw ParseError(lineno, "bad document frequency");
        }
    }
    return Vocabulary(std::move(tokens), std::move(df), n_docs, config);
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

std::optional<std::string> optional_string(const json& rec, const char* key, std::size_t lineno) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(lineno, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

Corpus parse_jsonl(std::istream& in) {
    Corpus corpus;
    std::unordered_map<std::string, LabelId> label_index;
    std::unordered_set<std::string> seen_ids;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;

        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!rec.is_object()) throw ParseError(lineno, "record is not an object");

        Document doc;
        auto id = optional_string(rec, "id", lineno);
        if (!id) throw ParseError(lineno, "missing field 'id'");
        auto text = optional_string(rec, "text", lineno);
        if (!text) throw ParseError(lineno, "missing field 'text'");
        doc.id = std::move(*id);
        doc.text = std::move(*text);
        doc.reference_summary = optional_string(rec, "reference_summary", lineno);
        doc.generated_summary = optional_string(rec, "generated_summary", lineno);
        if (auto s = optional_string(rec, "split", lineno)) doc.split = std::move(*s);

        if (auto it = rec.find("labels"); it != rec.end() && !it->is_null()) {
            if (!it->is_array()) throw ParseError(lineno, "field 'labels' must be an array");
            for (const auto& l : *it) {
                if (!l.is_string()) throw ParseError(lineno, "labels must be strings");
                auto name = l.get<std::string>();
                auto [pos, inserted] = label_index.emplace(name, static_cast<LabelId>(corpus.label_names.size()));
                if (inserted) corpus.label_names.push_back(name);
                doc.labels.insert(pos->second);
            }
        }
        if (auto it = rec.find("tokens"); it != rec.end() && !it->is_null()) {
            if (!it->is_array()) throw ParseError(lineno, "field 'tokens' must be an array");
            for (const auto& t : *it) {
                if (!t.is_number_integer() || t.get<std::int64_t>() < 0)
                    throw ParseError(lineno, "tokens must be non-negative integers");
                doc.tokens.push_back(t.get<TokenId>());
            }
        }

        if (!seen_ids.insert(doc.id).second) throw ParseError(lineno, "duplicate id '" + doc.id + "'");
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

Corpus parse_jsonl(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_jsonl(in);
}

std::string to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& doc : corpus.documents) {
        json rec = json::object();
        rec["id"] = doc.id;
        rec["text"] = doc.text;
        json labels = json::array();
        for (auto l : doc.labels) labels.push_back(corpus.label_names.at(static_cast<std::size_t>(l)));
        rec["labels"] = std::move(labels);
        if (doc.reference_summary) rec["reference_summary"] = *doc.reference_summary;
        if (doc.generated_summary) rec["generated_summary"] = *doc.generated_summary;
        rec["tokens"] = doc.tokens;
        if (!doc.split.empty()) rec["split"] = doc.split;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tokenization and vocabulary

std::vector<std::string> normalize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto is_punct = [](unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; };
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::string_view raw = text.substr(start, i - start);
        if (config.strip_punctuation) {
            while (!raw.empty() && is_punct(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
            while (!raw.empty() && is_punct(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
        }
        if (raw.empty()) continue;
        std::string token(raw);
        if (config.lowercase) {
            for (auto& c : token) {
                auto u = static_cast<unsigned char>(c);
                if (u < 0x80) c = static_cast<char>(std::tolower(u));
            }
        }
        if (config.stopwords.contains(token)) continue;
        out.push_back(std::move(token));
    }
    return out;
}

Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config) {
    config.validate();
    if (corpus.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");

    struct Stats {
        std::int64_t count = 0;
        std::int64_t docs = 0;
    };
    std::map<std::string, Stats> stats;  // ordered: ids follow lexicographic order
    for (const auto& doc : corpus.documents) {
        auto tokens = normalize(doc.text, config);
        std::sort(tokens.begin(), tokens.end());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            auto& s = stats[tokens[i]];
            ++s.count;
            if (i == 0 || tokens[i] != tokens[i - 1]) ++s.docs;
        }
    }

    const auto n_docs = static_cast<std::int64_t>(corpus.size());
    std::vector<std::string> tokens;
    std::vector<std::int64_t> df;
    for (const auto& [token, s] : stats) {
        if (s.count < config.min_token_count) continue;
        if (static_cast<double>(s.docs) / static_cast<double>(n_docs) > config.max_doc_fraction) continue;
        tokens.push_back(token);
        df.push_back(s.docs);
    }
    if (tokens.empty()) throw ValidationError("empty vocabulary");
    return Vocabulary(std::move(tokens), std::move(df), n_docs, config.fingerprint());
}

std::vector<TokenId> encode(std::string_view text, const Vocabulary& vocab, const TokenizerConfig& config) {
    std::vector<TokenId> ids;
    for (const auto& t : normalize(text, config))
        if (auto id = vocab.find(t)) ids.push_back(*id);
    return ids;
}

std::vector<std::string> decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(vocab.token(id));
    return out;
}

void encode_corpus(Corpus& corpus, const Vocabulary& vocab, const TokenizerConfig& config) {
    for (auto& doc : corpus.documents) doc.tokens = encode(doc.text, vocab, config);
}

// ---------------------------------------------------------------------------
// Filters

namespace {

template <class Keep>
Corpus filter_documents(const Corpus& corpus, Keep keep) {
    Corpus out;
    out.label_names = corpus.label_names;
    for (const auto& doc : corpus.documents)
        if (keep(doc)) out.documents.push_back(doc);
    return out;
}

std::string normalized_key(std::string_view text, const TokenizerConfig& config) {
    std::string key;
    for (const auto& t : normalize(text, config)) {
        if (!key.empty()) key += ' ';
        key += t;
    }
    return key;
}

}  // namespace

Corpus dedup(const Corpus& corpus, const TokenizerConfig& config) {
    std::unordered_set<std::string> seen;
    return filter_documents(corpus, [&](const Document& d) { return seen.insert(normalized_key(d.text, config)).second; });
}

Corpus filter_missing(const Corpus& corpus, std::span<const RequiredField> required) {
    return filter_documents(corpus, [&](const Document& d) {
        for (auto f : required) {
            switch (f) {
                case RequiredField::text:
                    if (d.text.empty()) return false;
                    break;
                case RequiredField::labels:
                    if (d.labels.empty()) return false;
                    break;
                case RequiredField::reference_summary:
                    if (!d.reference_summary || d.reference_summary->empty()) return false;
                    break;
            }
        }
        return true;
    });
}

Corpus filter_max_length(const Corpus& corpus, std::size_t max_tokens) {
    return filter_documents(corpus, [&](const Document& d) { return d.tokens.size() <= max_tokens; });
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
    if (train < 0 || validation < 0 || test < 0) throw ValidationError("split ratios must be non-negative");
    if (std::abs(train + validation + test - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
}

std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n, const SplitSpec& spec) {
    spec.validate();
    // The slack absorbs binary representation error in ratios such as 0.29.
    auto cut = [n](double r) {
        auto c = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
        return std::min(c, n);
    };
    std::size_t a = cut(spec.train);
    std::size_t b = std::max(a, cut(spec.train + spec.validation));
    return {a, b - a, n - b};
}

namespace {

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with a fixed draw rule so partitions do not depend on the standard library.
    for (std::size_t i = n; i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_unit(rng) * static_cast<double>(i));
        std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
    }
    return perm;
}

}  // namespace

SplitResult split(const Corpus& corpus, const SplitSpec& spec) {
    if (corpus.empty()) throw ValidationError("cannot split an empty corpus");
    auto [n_train, n_val, n_test] = split_sizes(corpus.size(), spec);
    auto perm = split_permutation(corpus.size(), spec.seed);

    SplitResult out;
    for (auto* part : {&out.train, &out.validation, &out.test}) part->label_names = corpus.label_names;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        auto& part = i < n_train ? out.train : (i < n_train + n_val ? out.validation : out.test);
        part.documents.push_back(corpus.documents[perm[i]]);
    }
    (void)n_test;
    return out;
}

Corpus annotate_split(const Corpus& corpus, const SplitSpec& spec) {
    if (corpus.empty()) throw ValidationError("cannot split an empty corpus");
    auto [n_train, n_val, n_test] = split_sizes(corpus.size(), spec);
    (void)n_test;
    auto perm = split_permutation(corpus.size(), spec.seed);
    Corpus out = corpus;
    for (std::size_t i = 0; i < perm.size(); ++i)
        out.documents[perm[i]].split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    return out;
}

Corpus select_split(const Corpus& corpus, std::string_view name) {
    return filter_documents(corpus, [&](const Document& d) { return d.split == name; });
}

}  // namespace occnlp
