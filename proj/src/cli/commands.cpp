#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "occnlp/classifier.hpp"
#include "occnlp/corpus.hpp"
#include "occnlp/error.hpp"
#include "occnlp/lda.hpp"
#include "occnlp/metrics.hpp"
#include "occnlp/util.hpp"

namespace occnlp::cli {

namespace {

Corpus load_corpus(const std::string& path) {
    auto text = read_file(path);
    try {
        return parse_jsonl(text);
    } catch (const ParseError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

Vocabulary load_vocabulary(const std::string& path) { return Vocabulary::parse(read_file(path)); }

void require_out(const Context& ctx) {
    if (ctx.out_path.empty()) throw ValidationError("--out is required");
}

bool has_split_tags(const Corpus& c) {
    return std::any_of(c.documents.begin(), c.documents.end(), [](const Document& d) { return !d.split.empty(); });
}

/// "auto" resolves to `fallback` when documents carry split tags and to all documents otherwise.
Corpus select_subset(const Corpus& corpus, const std::string& subset, const std::string& fallback) {
    std::string name = subset;
    if (name == "auto") name = has_split_tags(corpus) ? fallback : "all";
    if (name == "all") return corpus;
    if (name != "train" && name != "val" && name != "test") throw ValidationError("unknown subset '" + subset + "'");
    return select_split(corpus, name);
}

void check_token_range(const Corpus& corpus, const Vocabulary& vocab) {
    for (const auto& d : corpus.documents)
        for (auto t : d.tokens)
            if (t < 0 || static_cast<std::size_t>(t) >= vocab.size())
                throw ValidationError("document '" + d.id + "' has token id " + std::to_string(t) +
                                      " outside the vocabulary of size " + std::to_string(vocab.size()));
}

std::set<std::string> read_stopwords(const std::string& path) {
    std::set<std::string> out;
    std::istringstream in(read_file(path));
    for (std::string w; in >> w;) out.insert(w);
    return out;
}

}  // namespace

int cmd_ingest(const IngestOptions& o, Context& ctx) {
    require_out(ctx);
    if (o.vocab_out.empty()) throw ValidationError("--vocab-out is required");
    TokenizerConfig tok;
    tok.lowercase = !o.keep_case;
    tok.strip_punctuation = !o.keep_punctuation;
    tok.min_token_count = o.min_count;
    tok.max_doc_fraction = o.max_doc_fraction;
    if (!o.stopwords.empty()) tok.stopwords = read_stopwords(o.stopwords);
    tok.validate();

    std::vector<RequiredField> required;
    for (const auto& f : o.require) {
        if (f == "text") required.push_back(RequiredField::text);
        else if (f == "labels") required.push_back(RequiredField::labels);
        else if (f == "reference_summary") required.push_back(RequiredField::reference_summary);
        else throw ValidationError("unknown required field '" + f + "'");
    }

    auto raw = load_corpus(o.input);
    const auto n_raw = raw.size();
    auto corpus = dedup(filter_missing(raw, required), tok);
    const auto n_unique = corpus.size();
    if (corpus.empty()) throw ValidationError("no documents left after filtering");

    // Length is measured in normalized tokens, before frequency pruning.
    Corpus measured = corpus;
    for (auto& d : measured.documents) d.tokens.assign(normalize(d.text, tok).size(), 0);
    auto kept = filter_max_length(measured, o.max_tokens);
    if (kept.empty()) throw ValidationError("no documents left after the length filter");

    auto vocab = build_vocabulary(kept, tok);
    encode_corpus(kept, vocab, tok);

    write_files_atomically({{ctx.out_path, to_jsonl(kept)}, {o.vocab_out, vocab.serialize()}});
    ctx.err << "ingest: " << n_raw << " read, " << n_unique << " after filters and dedup, " << kept.size()
            << " within " << o.max_tokens << " tokens; vocabulary " << vocab.size() << "\n";
    return 0;
}

int cmd_split(const SplitOptions& o, Context& ctx) {
    require_out(ctx);
    if (o.ratios.size() != 3) throw ValidationError("--ratios takes three values: train,val,test");
    SplitSpec spec{o.ratios[0], o.ratios[1], o.ratios[2], ctx.seed};
    spec.validate();
    auto corpus = load_corpus(o.input);
    auto tagged = annotate_split(corpus, spec);
    write_file_atomically(ctx.out_path, to_jsonl(tagged));
    auto [a, b, c] = split_sizes(corpus.size(), spec);
    ctx.err << "split: train " << a << ", val " << b << ", test " << c << "\n";
    return 0;
}

int cmd_train_lda(const TrainLdaOptions& o, Context& ctx) {
    require_out(ctx);
    auto vocab = load_vocabulary(o.vocab);
    auto corpus = select_subset(load_corpus(o.input), o.subset, "train");
    check_token_range(corpus, vocab);

    Corpus usable;
    usable.label_names = corpus.label_names;
    for (const auto& d : corpus.documents)
        if (!d.tokens.empty()) usable.documents.push_back(d);
    if (usable.size() < corpus.size())
        ctx.err << "train-lda: skipping " << corpus.size() - usable.size() << " documents with no vocabulary tokens\n";
    if (usable.empty()) throw ValidationError("no documents to fit");

    LdaConfig cfg;
    cfg.n_topics = o.topics;
    cfg.alpha = o.alpha;
    cfg.beta = o.beta;
    cfg.iterations = o.iterations;
    cfg.seed = ctx.seed;
    cfg.validate();
    auto model = fit_gibbs(usable, vocab.size(), cfg);
    write_file_atomically(ctx.out_path, save_lda(model, vocab));
    ctx.err << "train-lda: " << model.n_docs() << " documents, " << model.total_tokens() << " tokens, "
            << model.n_topics() << " topics\n";
    return 0;
}

int cmd_topics(const TopicsOptions& o, Context& ctx) {
    if (o.top_n < 1) throw ValidationError("--top-n must be >= 1");
    auto vocab = load_vocabulary(o.vocab);
    auto model = load_lda(read_file(o.model), vocab);
    std::string text;
    for (int k = 0; k < model.n_topics(); ++k) {
        text += std::to_string(k);
        text += '\t';
        auto words = top_words(model, k, o.top_n);
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) text += ", ";
            text += vocab.token(words[i].id);
            if (o.with_probabilities) text += " (" + format_double(words[i].probability) + ")";
        }
        text += '\n';
    }
    if (ctx.out_path.empty()) ctx.out << text;
    else write_file_atomically(ctx.out_path, text);
    return 0;
}

int cmd_infer_topics(const InferTopicsOptions& o, Context& ctx) {
    auto vocab = load_vocabulary(o.vocab);
    auto model = load_lda(read_file(o.model), vocab);
    auto corpus = select_subset(load_corpus(o.input), o.subset, "test");
    check_token_range(corpus, vocab);
    if (o.top_k < 1 || o.top_k > static_cast<std::size_t>(model.n_topics()))
        throw ValidationError("--top-k must be between 1 and the number of topics");

    std::vector<std::size_t> rows(corpus.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (o.sample > 0 && o.sample < rows.size()) {
        // Seeded draw without replacement, reported in corpus order.
        std::mt19937_64 rng(ctx.seed);
        for (std::size_t i = 0; i < o.sample; ++i) {
            auto j = i + std::min(static_cast<std::size_t>(uniform_unit(rng) * static_cast<double>(rows.size() - i)),
                                  rows.size() - i - 1);
            std::swap(rows[i], rows[j]);
        }
        rows.resize(o.sample);
        std::sort(rows.begin(), rows.end());
    }

    std::string csv = "doc_id,rank,topic,probability\n";
    for (auto r : rows) {
        const auto& doc = corpus.documents[r];
        auto dist = infer(model, doc.tokens, o.iterations, ctx.seed);
        auto ranked = rank_topics(dist, o.top_k);
        for (std::size_t i = 0; i < ranked.size(); ++i)
            csv += doc.id + "," + std::to_string(i + 1) + "," + std::to_string(ranked[i]) + "," +
                   format_double(dist[static_cast<std::size_t>(ranked[i])]) + "\n";
    }
    if (ctx.out_path.empty()) ctx.out << csv;
    else write_file_atomically(ctx.out_path, csv);
    return 0;
}

int cmd_train_clf(const TrainClfOptions& o, Context& ctx) {
    require_out(ctx);
    auto vocab = load_vocabulary(o.vocab);
    auto corpus = select_subset(load_corpus(o.input), o.subset, "train");
    check_token_range(corpus, vocab);
    if (corpus.empty()) throw ValidationError("no documents to train on");

    // Labels absent from this subset cannot be learned; train on the rest.
    std::vector<std::size_t> observed(corpus.label_names.size(), 0);
    for (const auto& d : corpus.documents)
        for (auto l : d.labels) ++observed[static_cast<std::size_t>(l)];
    std::vector<LabelId> remap(corpus.label_names.size(), -1);
    std::vector<std::string> names;
    for (std::size_t l = 0; l < observed.size(); ++l) {
        if (observed[l] == 0) {
            ctx.err << "train-clf: label '" << corpus.label_names[l] << "' does not occur; skipped\n";
            continue;
        }
        remap[l] = static_cast<LabelId>(names.size());
        names.push_back(corpus.label_names[l]);
    }
    if (names.empty()) throw ValidationError("no labelled documents to train on");

    auto featurizer = TfidfFeaturizer::from_vocabulary(vocab);
    std::vector<SparseVector> features;
    std::vector<LabelSet> labels;
    for (const auto& d : corpus.documents) {
        features.push_back(featurizer.featurize(d.tokens));
        LabelSet s;
        for (auto l : d.labels) s.insert(remap[static_cast<std::size_t>(l)]);
        labels.push_back(std::move(s));
    }

    TrainConfig cfg{o.l2, o.learning_rate, o.epochs, o.tol, ctx.seed};
    auto model = train(features, labels, names, cfg);
    model.threshold = o.threshold;
    model.idf.assign(featurizer.idf().begin(), featurizer.idf().end());
    write_file_atomically(ctx.out_path, save_classifier(model, vocab));
    ctx.err << "train-clf: " << corpus.size() << " documents, " << names.size() << " labels\n";
    return 0;
}

int cmd_predict(const PredictOptions& o, Context& ctx) {
    require_out(ctx);
    auto corpus = select_subset(load_corpus(o.input), o.subset, "test");
    ScoreMatrix scores;
    double threshold = o.threshold.value_or(0.5);
    if (!o.scores.empty()) {
        scores = align_scores(import_scores(read_file(o.scores)), corpus);
    } else {
        if (o.model.empty() || o.vocab.empty()) throw ValidationError("--model and --vocab are required without --scores");
        auto vocab = load_vocabulary(o.vocab);
        auto model = load_classifier(read_file(o.model), vocab);
        check_token_range(corpus, vocab);
        if (!o.threshold) threshold = model.threshold;
        TfidfFeaturizer featurizer(model.idf);
        scores.label_names = model.label_names;
        scores.scores = Matrix<double>(corpus.size(), model.n_labels());
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            scores.doc_ids.push_back(corpus.documents[d].id);
            auto p = predict_proba(model, featurizer.featurize(corpus.documents[d].tokens));
            std::copy(p.begin(), p.end(), scores.scores.row(d).begin());
        }
    }
    if (!(threshold >= 0.0 && threshold < 1.0)) throw ValidationError("threshold must be in [0, 1)");

    std::vector<std::pair<std::filesystem::path, std::string>> outputs{{ctx.out_path, export_scores(scores)}};
    if (!o.labels_out.empty()) {
        std::string lines;
        for (std::size_t d = 0; d < scores.doc_ids.size(); ++d) {
            auto row = scores.scores.row(d);
            nlohmann::json rec;
            rec["id"] = scores.doc_ids[d];
            auto& predicted = rec["predicted"] = nlohmann::json::array();
            for (auto l : predict_labels(row, threshold)) predicted.push_back(scores.label_names[static_cast<std::size_t>(l)]);
            auto& ranking = rec["ranking"] = nlohmann::json::array();
            for (auto l : rank_labels(row)) ranking.push_back(scores.label_names[static_cast<std::size_t>(l)]);
            lines += rec.dump() + "\n";
        }
        outputs.emplace_back(o.labels_out, std::move(lines));
    }
    write_files_atomically(outputs);
    ctx.err << "predict: " << scores.doc_ids.size() << " documents scored\n";
    return 0;
}

int cmd_eval(const EvalOptions& o, Context& ctx) {
    if (o.cutoffs.empty()) throw ValidationError("--cutoffs must not be empty");
    for (int n : o.cutoffs)
        if (n < 1) throw ValidationError("cutoffs must be >= 1");
    auto corpus = select_subset(load_corpus(o.input), o.subset, "test");

    std::vector<LabelPrediction> predictions;
    if (!o.scores.empty() && !o.summaries_only) predictions = join_predictions(corpus, import_scores(read_file(o.scores)));
    std::vector<SummaryPair> summaries;
    if (!o.labels_only) summaries = summary_pairs(corpus);
    if (predictions.empty() && summaries.empty())
        throw ValidationError("no predictions to evaluate: pass --scores or provide generated_summary fields");

    auto report = evaluate(predictions, summaries, o.cutoffs, o.threshold);
    auto table = report.to_table();
    std::vector<std::pair<std::filesystem::path, std::string>> outputs;
    if (!ctx.out_path.empty()) outputs.emplace_back(ctx.out_path, report.to_csv());
    if (!o.table_out.empty()) outputs.emplace_back(o.table_out, table);
    if (!outputs.empty()) write_files_atomically(outputs);
    ctx.out << table;
    return 0;
}

}  // namespace occnlp::cli
