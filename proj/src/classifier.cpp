#include "occnlp/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "occnlp/error.hpp"
#include "occnlp/kernels.hpp"
#include "occnlp/util.hpp"

namespace occnlp {

using nlohmann::json;

double SparseVector::dot(std::span<const double> dense) const {
    double acc = 0.0;
    for (const auto& [i, v] : entries) acc += v * dense[static_cast<std::size_t>(i)];
    return acc;
}

double SparseVector::squared_norm() const {
    double acc = 0.0;
    for (const auto& e : entries) acc += e.second * e.second;
    return acc;
}

// ---------------------------------------------------------------------------
// TF-IDF

TfidfFeaturizer::TfidfFeaturizer(std::vector<double> idf) : idf_(std::move(idf)) {
    for (auto v : idf_)
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("idf weights must be positive and finite");
}

TfidfFeaturizer TfidfFeaturizer::from_vocabulary(const Vocabulary& vocab) {
    std::vector<double> idf(vocab.size());
    const double docs = static_cast<double>(vocab.n_docs());
    for (std::size_t v = 0; v < vocab.size(); ++v)
        idf[v] = std::log((1.0 + docs) / (1.0 + static_cast<double>(vocab.doc_freqs()[v]))) + 1.0;
    return TfidfFeaturizer(std::move(idf));
}

SparseVector TfidfFeaturizer::featurize(std::span<const TokenId> tokens) const {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (auto t : tokens)
        if (t >= 0 && static_cast<std::size_t>(t) < idf_.size()) ids.push_back(t);
    std::sort(ids.begin(), ids.end());

    SparseVector x{idf_.size(), {}};
    for (std::size_t i = 0; i < ids.size();) {
        std::size_t j = i;
        while (j < ids.size() && ids[j] == ids[i]) ++j;
        x.entries.emplace_back(ids[i], static_cast<double>(j - i) * idf_[static_cast<std::size_t>(ids[i])]);
        i = j;
    }
    double norm = std::sqrt(x.squared_norm());
    if (norm > 0.0)
        for (auto& e : x.entries) e.second /= norm;
    return x;
}

// ---------------------------------------------------------------------------
// Objective

void TrainConfig::validate() const {
    if (!(l2_lambda >= 0.0)) throw ValidationError("l2_lambda must be >= 0");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(convergence_tol > 0.0)) throw ValidationError("convergence_tol must be > 0");
}

double sigmoid(double z) noexcept {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        double e = std::exp(z);
        p = e / (1.0 + e);
    }
    // Saturate inside the open interval so scores stay strictly between 0 and 1.
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - 0x1.0p-53;
    return std::clamp(p, lo, hi);
}

namespace {

/// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// Unclamped logistic for gradients.
double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

BinaryLogisticObjective::BinaryLogisticObjective(std::span<const SparseVector> features,
                                                 std::span<const std::uint8_t> targets, std::size_t dim,
                                                 double l2_lambda)
    : features_(features), targets_(targets), dim_(dim), l2_lambda_(l2_lambda) {
    if (features_.size() != targets_.size()) throw ValidationError("features and targets differ in length");
    if (features_.empty()) throw ValidationError("objective needs at least one example");
    for (const auto& x : features_)
        if (x.dim != dim_) throw ValidationError("feature dimension mismatch");
}

double BinaryLogisticObjective::value(std::span<const double> weights, double bias) const {
    const auto& kern = kernels::active();
    double loss = 0.0;
    for (std::size_t d = 0; d < features_.size(); ++d) {
        double z = features_[d].dot(weights) + bias;
        loss += targets_[d] ? softplus(-z) : softplus(z);
    }
    return loss / static_cast<double>(features_.size()) + 0.5 * l2_lambda_ * kern.dot(weights, weights);
}

double BinaryLogisticObjective::gradient(std::span<const double> weights, double bias, std::span<double> grad_w) const {
    const auto& kern = kernels::active();
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(features_.size());
    double grad_b = 0.0;
    for (std::size_t d = 0; d < features_.size(); ++d) {
        double z = features_[d].dot(weights) + bias;
        double r = (logistic(z) - (targets_[d] ? 1.0 : 0.0)) * inv_n;
        grad_b += r;
        for (const auto& [i, v] : features_[d].entries) grad_w[static_cast<std::size_t>(i)] += r * v;
    }
    if (l2_lambda_ > 0.0) kern.axpy(l2_lambda_, weights, grad_w);
    return grad_b;
}

// ---------------------------------------------------------------------------
// Model

void MultiLabelLinearModel::validate() const {
    if (label_names.empty()) throw ValidationError("classifier needs at least one label");
    if (weights.rows() != label_names.size() || bias.size() != label_names.size())
        throw ValidationError("classifier weight table does not match its labels");
    if (!idf.empty() && idf.size() != weights.cols()) throw ValidationError("classifier idf does not match its weights");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must be in (0, 1)");
    std::unordered_set<std::string> seen;
    for (const auto& n : label_names)
        if (!seen.insert(n).second) throw ValidationError("duplicate label name '" + n + "'");
    for (auto w : weights.data())
        if (!std::isfinite(w)) throw ValidationError("classifier weights must be finite");
    for (auto b : bias)
        if (!std::isfinite(b)) throw ValidationError("classifier biases must be finite");
}

MultiLabelLinearModel train(std::span<const SparseVector> features, std::span<const LabelSet> labels,
                            std::span<const std::string> label_names, const TrainConfig& config,
                            const EpochObserver& observer) {
    config.validate();
    if (features.empty()) throw ValidationError("cannot train on an empty set");
    if (features.size() != labels.size()) throw ValidationError("features and label sets differ in length");
    if (label_names.empty()) throw ValidationError("cannot train without labels");
    const std::size_t dim = features.front().dim;
    const std::size_t L = label_names.size();

    MultiLabelLinearModel model;
    model.weights = Matrix<double>(L, dim);
    model.bias.assign(L, 0.0);
    model.label_names.assign(label_names.begin(), label_names.end());

    const auto& kern = kernels::active();
    std::vector<std::uint8_t> targets(features.size());
    std::vector<double> grad(dim);
    for (std::size_t l = 0; l < L; ++l) {
        bool seen = false;
        for (std::size_t d = 0; d < labels.size(); ++d) {
            targets[d] = labels[d].contains(static_cast<LabelId>(l)) ? 1 : 0;
            seen = seen || targets[d];
        }
        if (!seen) throw ValidationError("label '" + label_names[l] + "' never occurs in the training set");

        BinaryLogisticObjective objective(features, targets, dim, config.l2_lambda);
        auto w = model.weights.row(l);
        double& b = model.bias[l];
        for (int epoch = 1; epoch <= config.epochs; ++epoch) {
            double gb = objective.gradient(w, b, grad);
            if (std::sqrt(kern.dot(grad, grad) + gb * gb) < config.convergence_tol) break;
            kern.axpy(-config.learning_rate, grad, w);
            b -= config.learning_rate * gb;
            if (observer) observer(l, epoch, objective.value(w, b));
        }
    }
    model.validate();
    return model;
}

std::vector<double> predict_proba(const MultiLabelLinearModel& model, const SparseVector& x) {
    if (x.dim != model.dim())
        throw ValidationError("feature dimension " + std::to_string(x.dim) + " does not match model dimension " +
                              std::to_string(model.dim()));
    std::vector<double> p(model.n_labels());
    for (std::size_t l = 0; l < p.size(); ++l) p[l] = sigmoid(x.dot(model.weights.row(l)) + model.bias[l]);
    return p;
}

LabelSet predict_labels(std::span<const double> probabilities, double threshold) {
    LabelSet out;
    for (std::size_t l = 0; l < probabilities.size(); ++l)
        if (probabilities[l] > threshold) out.insert(static_cast<LabelId>(l));
    return out;
}

std::vector<LabelId> rank_labels(std::span<const double> probabilities) {
    std::vector<LabelId> ids(probabilities.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](LabelId a, LabelId b) {
        return probabilities[static_cast<std::size_t>(a)] > probabilities[static_cast<std::size_t>(b)];
    });
    return ids;
}

namespace {
constexpr const char* kClfFormat = "occnlp-linear-classifier";
constexpr int kClfVersion = 1;
}  // namespace

std::string save_classifier(const MultiLabelLinearModel& model, const Vocabulary& vocab) {
    model.validate();
    if (model.dim() != vocab.size()) throw ValidationError("classifier dimension differs from the vocabulary size");
    json j;
    j["format"] = kClfFormat;
    j["version"] = kClfVersion;
    j["vocab_hash"] = to_hex(vocab.hash());
    j["label_names"] = model.label_names;
    j["threshold"] = model.threshold;
    j["dim"] = model.dim();
    j["idf"] = model.idf;
    json rows = json::array();
    for (std::size_t l = 0; l < model.n_labels(); ++l) {
        auto r = model.weights.row(l);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["weights"] = std::move(rows);
    j["bias"] = model.bias;
    return j.dump() + "\n";
}

MultiLabelLinearModel load_classifier(std::string_view text, const Vocabulary& vocab) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("classifier model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != kClfFormat) throw ValidationError("not a classifier model file");
        if (j.at("version") != kClfVersion) throw ValidationError("unsupported classifier model version");
        if (j.at("vocab_hash").get<std::string>() != to_hex(vocab.hash()))
            throw ValidationError("classifier was trained with a different vocabulary");
        MultiLabelLinearModel m;
        m.label_names = j.at("label_names").get<std::vector<std::string>>();
        m.threshold = j.at("threshold").get<double>();
        m.idf = j.at("idf").get<std::vector<double>>();
        m.bias = j.at("bias").get<std::vector<double>>();
        const auto dim = j.at("dim").get<std::size_t>();
        const auto& rows = j.at("weights");
        m.weights = Matrix<double>(rows.size(), dim);
        for (std::size_t l = 0; l < rows.size(); ++l) {
            auto r = rows[l].get<std::vector<double>>();
            if (r.size() != dim) throw ValidationError("classifier weight row has the wrong length");
            std::copy(r.begin(), r.end(), m.weights.row(l).begin());
        }
        m.validate();
        if (m.dim() != vocab.size()) throw ValidationError("classifier dimension differs from the vocabulary size");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed classifier model file: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Score matrices

ScoreMatrix ScoreMatrix::aligned_to(std::span<const std::string> ids) const {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < doc_ids.size(); ++r) row_of.emplace(doc_ids[r], r);
    ScoreMatrix out;
    out.label_names = label_names;
    out.scores = Matrix<double>(ids.size(), label_names.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = row_of.find(ids[i]);
        if (it == row_of.end()) throw ValidationError("no scores for document '" + ids[i] + "'");
        out.doc_ids.push_back(ids[i]);
        std::copy(scores.row(it->second).begin(), scores.row(it->second).end(), out.scores.row(i).begin());
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

ScoreMatrix import_scores(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing score header");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "doc_id") throw ParseError(1, "score header must start with doc_id");
    ScoreMatrix m;
    m.label_names.assign(header.begin() + 1, header.end());
    if (m.label_names.empty()) throw ParseError(1, "score header names no labels");
    std::unordered_set<std::string> names;
    for (const auto& n : m.label_names)
        if (n.empty() || !names.insert(n).second) throw ParseError(1, "empty or duplicate label name '" + n + "'");

    const std::size_t L = m.label_names.size();
    std::vector<double> values;
    std::unordered_set<std::string> ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != L + 1)
            throw ParseError(lineno, "expected " + std::to_string(L + 1) + " fields, got " + std::to_string(fields.size()));
        if (fields[0].empty() || !ids.insert(fields[0]).second)
            throw ParseError(lineno, "empty or duplicate doc id '" + fields[0] + "'");
        m.doc_ids.push_back(fields[0]);
        for (std::size_t c = 1; c <= L; ++c) {
            const auto& f = fields[c];
            double v = 0.0;
            auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || end != f.data() + f.size() || f.empty())
                throw ParseError(lineno, "column " + std::to_string(c + 1) + ": not a number '" + f + "'");
            if (!(v >= 0.0 && v <= 1.0))
                throw ParseError(lineno, "column " + std::to_string(c + 1) + ": score " + f + " outside [0, 1]");
            values.push_back(v);
        }
    }
    m.scores = Matrix<double>(m.doc_ids.size(), L);
    std::copy(values.begin(), values.end(), m.scores.data().begin());
    return m;
}

ScoreMatrix import_scores(std::string_view text) {
    std::istringstream in{std::string(text)};
    return import_scores(in);
}

std::string export_scores(const ScoreMatrix& scores) {
    std::string out = "doc_id";
    for (const auto& n : scores.label_names) out += "," + n;
    out += '\n';
    for (std::size_t r = 0; r < scores.doc_ids.size(); ++r) {
        out += scores.doc_ids[r];
        for (auto v : scores.scores.row(r)) out += "," + format_double(v);
        out += '\n';
    }
    return out;
}

ScoreMatrix align_scores(const ScoreMatrix& scores, const Corpus& corpus) {
    std::unordered_set<std::string> corpus_ids;
    for (const auto& d : corpus.documents) corpus_ids.insert(d.id);
    for (const auto& id : scores.doc_ids)
        if (!corpus_ids.contains(id)) throw ValidationError("scored document '" + id + "' is not in the corpus");
    std::unordered_set<std::string> scored(scores.doc_ids.begin(), scores.doc_ids.end());
    std::vector<std::string> order;
    for (const auto& d : corpus.documents)
        if (scored.contains(d.id)) order.push_back(d.id);
    return scores.aligned_to(order);
}

}  // namespace occnlp
