#include "occnlp/lda.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include <json.hpp>

#include "occnlp/error.hpp"
#include "occnlp/kernels.hpp"
#include "occnlp/util.hpp"

namespace occnlp {

using nlohmann::json;

void LdaConfig::validate() const {
    if (n_topics < 1) throw ValidationError("n_topics must be >= 1");
    if (alpha && !(*alpha > 0.0)) throw ValidationError("alpha must be > 0");
    if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
    if (iterations < 1) throw ValidationError("iterations must be >= 1");
}

LdaModel::LdaModel(LdaConfig config, std::size_t vocab_size, std::vector<std::string> doc_ids,
                   std::vector<std::vector<TokenId>> tokens, std::vector<std::vector<std::int32_t>> assignments)
    : config_(std::move(config)), vocab_size_(vocab_size), doc_ids_(std::move(doc_ids)), tokens_(std::move(tokens)),
      assignments_(std::move(assignments)) {
    config_.validate();
    alpha_ = config_.effective_alpha();
    config_.alpha = alpha_;
    const auto K = static_cast<std::size_t>(config_.n_topics);
    if (tokens_.size() != doc_ids_.size() || assignments_.size() != doc_ids_.size())
        throw ValidationError("lda: document tables disagree in length");

    word_topic_ = Matrix<std::int32_t>(vocab_size_, K);
    doc_topic_ = Matrix<std::int32_t>(doc_ids_.size(), K);
    topic_totals_.assign(K, 0);
    for (std::size_t d = 0; d < tokens_.size(); ++d) {
        if (tokens_[d].size() != assignments_[d].size())
            throw ValidationError("lda: assignment count differs from token count in document " + doc_ids_[d]);
        for (std::size_t i = 0; i < tokens_[d].size(); ++i) {
            auto w = tokens_[d][i];
            auto z = assignments_[d][i];
            if (w < 0 || static_cast<std::size_t>(w) >= vocab_size_)
                throw ValidationError("lda: token id out of range in document " + doc_ids_[d]);
            if (z < 0 || static_cast<std::size_t>(z) >= K)
                throw ValidationError("lda: topic assignment out of range in document " + doc_ids_[d]);
            ++word_topic_(static_cast<std::size_t>(w), static_cast<std::size_t>(z));
            ++doc_topic_(d, static_cast<std::size_t>(z));
            ++topic_totals_[static_cast<std::size_t>(z)];
        }
    }
}

std::int64_t LdaModel::total_tokens() const noexcept {
    std::int64_t n = 0;
    for (const auto& t : tokens_) n += static_cast<std::int64_t>(t.size());
    return n;
}

std::string LdaModel::check_invariants() const {
    const auto K = static_cast<std::size_t>(config_.n_topics);
    for (std::size_t d = 0; d < n_docs(); ++d) {
        std::int64_t row = 0;
        std::vector<std::int32_t> hist(K, 0);
        for (auto z : assignments_[d]) {
            if (z < 0 || static_cast<std::size_t>(z) >= K) return "assignment out of range in document " + doc_ids_[d];
            ++hist[static_cast<std::size_t>(z)];
        }
        for (std::size_t k = 0; k < K; ++k) {
            row += doc_topic_(d, k);
            if (doc_topic_(d, k) != hist[k]) return "doc-topic counts disagree with assignments in " + doc_ids_[d];
        }
        if (row != static_cast<std::int64_t>(tokens_[d].size())) return "doc-topic row sum differs from length of " + doc_ids_[d];
    }
    std::int64_t grand = 0;
    for (std::size_t k = 0; k < K; ++k) {
        std::int64_t col = 0;
        for (std::size_t v = 0; v < vocab_size_; ++v) {
            if (word_topic_(v, k) < 0) return "negative topic-word count";
            col += word_topic_(v, k);
        }
        if (col != topic_totals_[k]) return "topic total " + std::to_string(k) + " differs from its word counts";
        grand += topic_totals_[k];
    }
    if (grand != total_tokens()) return "topic totals do not sum to the token count";
    return {};
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

/// Draws index k with probability weights[k] / sum(weights).
std::size_t draw_categorical(std::span<const double> weights, std::mt19937_64& rng) {
    double total = 0.0;
    for (auto w : weights) total += w;
    double u = uniform_unit(rng) * total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) return k;
    }
    return weights.size() - 1;
}

std::size_t draw_uniform(std::size_t n, std::mt19937_64& rng) {
    return std::min(static_cast<std::size_t>(uniform_unit(rng) * static_cast<double>(n)), n - 1);
}

}  // namespace

class GibbsSampler {
public:
    static LdaModel fit(const Corpus& corpus, std::size_t vocab_size, const LdaConfig& config,
                        const SweepObserver& observer) {
        config.validate();
        if (corpus.empty()) throw ValidationError("cannot fit LDA on an empty corpus");
        if (vocab_size == 0) throw ValidationError("cannot fit LDA with an empty vocabulary");

        const auto K = static_cast<std::size_t>(config.n_topics);
        std::mt19937_64 rng(config.seed);
        std::vector<std::string> ids;
        std::vector<std::vector<TokenId>> tokens;
        std::vector<std::vector<std::int32_t>> z;
        for (const auto& doc : corpus.documents) {
            if (doc.tokens.empty()) throw ValidationError("cannot fit LDA on empty document " + doc.id);
            ids.push_back(doc.id);
            tokens.push_back(doc.tokens);
            auto& zd = z.emplace_back(doc.tokens.size());
            for (auto& t : zd) t = static_cast<std::int32_t>(draw_uniform(K, rng));
        }
        LdaModel m(config, vocab_size, std::move(ids), std::move(tokens), std::move(z));

        const auto& kern = kernels::active();
        const double alpha = m.alpha_;
        const double beta = m.config_.beta;
        const double vbeta = static_cast<double>(vocab_size) * beta;
        std::vector<double> weights(K);
        auto totals = std::span<std::int32_t>(m.topic_totals_);

        for (int sweep = 1; sweep <= config.iterations; ++sweep) {
            for (std::size_t d = 0; d < m.n_docs(); ++d) {
                auto dt = m.doc_topic_.row(d);
                const auto& words = m.tokens_[d];
                auto& zd = m.assignments_[d];
                for (std::size_t i = 0; i < words.size(); ++i) {
                    auto wt = m.word_topic_.row(static_cast<std::size_t>(words[i]));
                    auto old = static_cast<std::size_t>(zd[i]);
                    --dt[old];
                    --wt[old];
                    --totals[old];
                    kern.topic_weights(dt, wt, totals, alpha, beta, vbeta, weights);
                    auto k = draw_categorical(weights, rng);
                    ++dt[k];
                    ++wt[k];
                    ++totals[k];
                    zd[i] = static_cast<std::int32_t>(k);
                }
            }
            if (observer) observer(sweep, m);
        }
        return m;
    }
};

LdaModel fit_gibbs(const Corpus& corpus, std::size_t vocab_size, const LdaConfig& config, const SweepObserver& observer) {
    return GibbsSampler::fit(corpus, vocab_size, config, observer);
}

Matrix<double> phi(const LdaModel& model) {
    const auto K = static_cast<std::size_t>(model.n_topics());
    const auto V = model.vocab_size();
    const double beta = model.beta();
    const double vbeta = static_cast<double>(V) * beta;
    Matrix<double> out(K, V);
    for (std::size_t k = 0; k < K; ++k) {
        double denom = static_cast<double>(model.topic_total(static_cast<int>(k))) + vbeta;
        for (std::size_t v = 0; v < V; ++v)
            out(k, v) = (static_cast<double>(model.topic_word_count(static_cast<int>(k), static_cast<TokenId>(v))) + beta) / denom;
    }
    return out;
}

Matrix<double> theta(const LdaModel& model) {
    const auto K = static_cast<std::size_t>(model.n_topics());
    const double alpha = model.alpha();
    Matrix<double> out(model.n_docs(), K);
    for (std::size_t d = 0; d < model.n_docs(); ++d) {
        double denom = static_cast<double>(model.tokens(d).size()) + static_cast<double>(K) * alpha;
        for (std::size_t k = 0; k < K; ++k)
            out(d, k) = (static_cast<double>(model.doc_topic_count(d, static_cast<int>(k))) + alpha) / denom;
    }
    return out;
}

std::vector<TopWord> top_words(const LdaModel& model, int k, std::size_t n) {
    if (k < 0 || k >= model.n_topics()) throw ValidationError("topic " + std::to_string(k) + " out of range");
    if (n < 1) throw ValidationError("top_words needs n >= 1");
    // phi is monotone in the count within a topic, so rank by count.
    std::vector<TokenId> ids(model.vocab_size());
    std::iota(ids.begin(), ids.end(), TokenId{0});
    const auto take = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(), [&](TokenId a, TokenId b) {
        auto ca = model.topic_word_count(k, a), cb = model.topic_word_count(k, b);
        return ca != cb ? ca > cb : a < b;
    });
    const double denom = static_cast<double>(model.topic_total(k)) + static_cast<double>(model.vocab_size()) * model.beta();
    std::vector<TopWord> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({ids[i], (static_cast<double>(model.topic_word_count(k, ids[i])) + model.beta()) / denom});
    return out;
}

std::vector<double> infer(const LdaModel& model, std::span<const TokenId> tokens, int iterations, std::uint64_t seed) {
    if (iterations < 1) throw ValidationError("infer needs iterations >= 1");
    const auto K = static_cast<std::size_t>(model.n_topics());
    const double alpha = model.alpha();
    std::vector<TokenId> words;
    for (auto t : tokens)
        if (t >= 0 && static_cast<std::size_t>(t) < model.vocab_size()) words.push_back(t);

    std::vector<std::int32_t> dt(K, 0);
    if (!words.empty()) {
        std::mt19937_64 rng(seed);
        std::vector<std::int32_t> z(words.size());
        for (auto& t : z) {
            t = static_cast<std::int32_t>(draw_uniform(K, rng));
            ++dt[static_cast<std::size_t>(t)];
        }
        const auto& kern = kernels::active();
        const double beta = model.beta();
        const double vbeta = static_cast<double>(model.vocab_size()) * beta;
        std::vector<double> weights(K);
        for (int it = 0; it < iterations; ++it) {
            for (std::size_t i = 0; i < words.size(); ++i) {
                --dt[static_cast<std::size_t>(z[i])];
                kern.topic_weights(dt, model.word_topic_row(words[i]), model.topic_totals(), alpha, beta, vbeta, weights);
                auto k = draw_categorical(weights, rng);
                ++dt[k];
                z[i] = static_cast<std::int32_t>(k);
            }
        }
    }
    std::vector<double> out(K);
    const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) out[k] = (static_cast<double>(dt[k]) + alpha) / denom;
    return out;
}

std::vector<int> rank_topics(std::span<const double> distribution, std::size_t n) {
    if (n > distribution.size())
        throw ValidationError("cannot rank " + std::to_string(n) + " of " + std::to_string(distribution.size()) + " topics");
    std::vector<int> ids(distribution.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        return distribution[static_cast<std::size_t>(a)] > distribution[static_cast<std::size_t>(b)];
    });
    ids.resize(n);
    return ids;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

void SyntheticSpec::validate() const {
    if (n_topics < 1) throw ValidationError("synthetic: n_topics must be >= 1");
    if (vocab_size < 1) throw ValidationError("synthetic: vocab_size must be >= 1");
    if (!(poisson_lambda > 0.0)) throw ValidationError("synthetic: poisson_lambda must be > 0");
    if (!(alpha > 0.0)) throw ValidationError("synthetic: alpha must be > 0");
    if (true_phi) {
        if (true_phi->rows() != static_cast<std::size_t>(n_topics) || true_phi->cols() != vocab_size)
            throw ValidationError("synthetic: true_phi must be n_topics x vocab_size");
        for (std::size_t k = 0; k < true_phi->rows(); ++k) {
            double sum = 0.0;
            for (auto p : true_phi->row(k)) {
                if (p < 0.0) throw ValidationError("synthetic: true_phi has a negative entry");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("synthetic: true_phi rows must sum to 1");
        }
    }
}

namespace {

void draw_dirichlet(double concentration, std::span<double> out, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    double sum = 0.0;
    for (auto& x : out) sum += (x = gamma(rng));
    if (sum > 0.0) {
        for (auto& x : out) x /= sum;
    } else {
        // All draws underflowed: the mass concentrates on a single component.
        std::fill(out.begin(), out.end(), 0.0);
        out[draw_uniform(out.size(), rng)] = 1.0;
    }
}

std::string synthetic_token(std::size_t id, std::size_t vocab_size) {
    auto width = std::to_string(vocab_size > 0 ? vocab_size - 1 : 0).size();
    auto digits = std::to_string(id);
    return "w" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto K = static_cast<std::size_t>(spec.n_topics);
    const auto V = spec.vocab_size;
    std::mt19937_64 rng(spec.seed);

    SyntheticCorpus out;
    if (spec.true_phi) {
        out.phi = *spec.true_phi;
    } else {
        out.phi = Matrix<double>(K, V);
        for (std::size_t k = 0; k < K; ++k) draw_dirichlet(0.1, out.phi.row(k), rng);
    }
    out.theta = Matrix<double>(spec.n_docs, K);

    std::poisson_distribution<int> length(spec.poisson_lambda);
    const auto id_width = std::to_string(spec.n_docs).size();
    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        int n = 0;
        while (n == 0) n = length(rng);
        auto th = out.theta.row(d);
        draw_dirichlet(spec.alpha, th, rng);

        Document doc;
        auto digits = std::to_string(d);
        doc.id = "syn-" + std::string(id_width - digits.size(), '0') + digits;
        auto& topics = out.topics.emplace_back();
        for (int i = 0; i < n; ++i) {
            auto z = draw_categorical(th, rng);
            auto w = draw_categorical(out.phi.row(z), rng);
            topics.push_back(static_cast<std::int32_t>(z));
            doc.tokens.push_back(static_cast<TokenId>(w));
            if (!doc.text.empty()) doc.text += ' ';
            doc.text += synthetic_token(w, V);
        }
        out.corpus.documents.push_back(std::move(doc));
    }
    return out;
}

Vocabulary synthetic_vocabulary(std::size_t vocab_size) {
    std::vector<std::string> tokens;
    for (std::size_t v = 0; v < vocab_size; ++v) tokens.push_back(synthetic_token(v, vocab_size));
    return Vocabulary(std::move(tokens), std::vector<std::int64_t>(vocab_size, 0), 0);
}

// ---------------------------------------------------------------------------
// Model files

namespace {
constexpr const char* kLdaFormat = "occnlp-lda";
constexpr int kLdaVersion = 1;
}  // namespace

std::string save_lda(const LdaModel& model, const Vocabulary& vocab) {
    if (vocab.size() != model.vocab_size()) throw ValidationError("vocabulary size differs from the model's");
    const auto K = static_cast<std::size_t>(model.n_topics());
    json j;
    j["format"] = kLdaFormat;
    j["version"] = kLdaVersion;
    j["vocab_hash"] = to_hex(vocab.hash());
    j["config"] = {{"n_topics", model.n_topics()},
                   {"alpha", model.alpha()},
                   {"beta", model.beta()},
                   {"iterations", model.config().iterations},
                   {"seed", model.config().seed}};
    j["vocab_size"] = model.vocab_size();
    j["n_docs"] = model.n_docs();

    std::vector<std::int32_t> tw;
    tw.reserve(K * model.vocab_size());
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t v = 0; v < model.vocab_size(); ++v)
            tw.push_back(model.topic_word_count(static_cast<int>(k), static_cast<TokenId>(v)));
    std::vector<std::int32_t> dt;
    dt.reserve(model.n_docs() * K);
    for (std::size_t d = 0; d < model.n_docs(); ++d)
        for (std::size_t k = 0; k < K; ++k) dt.push_back(model.doc_topic_count(d, static_cast<int>(k)));

    j["topic_word_counts"] = std::move(tw);
    j["doc_topic_counts"] = std::move(dt);
    j["topic_totals"] = std::vector<std::int32_t>(model.topic_totals().begin(), model.topic_totals().end());

    json docs = json::array();
    for (std::size_t d = 0; d < model.n_docs(); ++d) {
        docs.push_back({{"id", model.doc_ids()[d]},
                        {"tokens", std::vector<TokenId>(model.tokens(d).begin(), model.tokens(d).end())},
                        {"assignments", std::vector<std::int32_t>(model.assignments(d).begin(), model.assignments(d).end())}});
    }
    j["documents"] = std::move(docs);
    return j.dump() + "\n";
}

LdaModel load_lda(std::string_view text, const Vocabulary& vocab) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("LDA model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != kLdaFormat) throw ValidationError("not an LDA model file");
        if (j.at("version") != kLdaVersion) throw ValidationError("unsupported LDA model version");
        if (j.at("vocab_hash").get<std::string>() != to_hex(vocab.hash()))
            throw ValidationError("LDA model was trained with a different vocabulary");

        LdaConfig cfg;
        const auto& c = j.at("config");
        cfg.n_topics = c.at("n_topics").get<int>();
        cfg.alpha = c.at("alpha").get<double>();
        cfg.beta = c.at("beta").get<double>();
        cfg.iterations = c.at("iterations").get<int>();
        cfg.seed = c.at("seed").get<std::uint64_t>();

        std::vector<std::string> ids;
        std::vector<std::vector<TokenId>> tokens;
        std::vector<std::vector<std::int32_t>> z;
        for (const auto& d : j.at("documents")) {
            ids.push_back(d.at("id").get<std::string>());
            tokens.push_back(d.at("tokens").get<std::vector<TokenId>>());
            z.push_back(d.at("assignments").get<std::vector<std::int32_t>>());
        }
        LdaModel m(cfg, j.at("vocab_size").get<std::size_t>(), std::move(ids), std::move(tokens), std::move(z));
        if (m.vocab_size() != vocab.size()) throw ValidationError("LDA model vocabulary size differs");

        // Stored tables must agree with the ones rebuilt from the assignments.
        const auto K = static_cast<std::size_t>(m.n_topics());
        auto tw = j.at("topic_word_counts").get<std::vector<std::int32_t>>();
        auto dt = j.at("doc_topic_counts").get<std::vector<std::int32_t>>();
        auto tt = j.at("topic_totals").get<std::vector<std::int32_t>>();
        bool ok = tw.size() == K * m.vocab_size() && dt.size() == m.n_docs() * K && tt.size() == K;
        for (std::size_t k = 0; ok && k < K; ++k) {
            ok = tt[k] == m.topic_total(static_cast<int>(k));
            for (std::size_t v = 0; ok && v < m.vocab_size(); ++v)
                ok = tw[k * m.vocab_size() + v] == m.topic_word_count(static_cast<int>(k), static_cast<TokenId>(v));
        }
        for (std::size_t d = 0; ok && d < m.n_docs(); ++d)
            for (std::size_t k = 0; ok && k < K; ++k) ok = dt[d * K + k] == m.doc_topic_count(d, static_cast<int>(k));
        if (!ok) throw ValidationError("LDA model count tables are inconsistent with its assignments");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed LDA model file: ") + e.what());
    }
}

}  // namespace occnlp
