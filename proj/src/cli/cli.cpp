#include "occnlp/cli.hpp"

#include <CLI11.hpp>

#include <ostream>

#include "commands.hpp"
#include "occnlp/error.hpp"

namespace occnlp::cli {

namespace {

void add_ingest(CLI::App& app, IngestOptions& o) {
    app.add_option("--input", o.input, "Raw JSONL corpus")->required()->check(CLI::ExistingFile);
    app.add_option("--vocab-out", o.vocab_out, "Vocabulary file to write")->required();
    app.add_option("--require", o.require, "Fields that must be non-empty: text, labels, reference_summary")
        ->delimiter(',');
    app.add_option("--max-tokens", o.max_tokens, "Drop documents longer than this many tokens")->capture_default_str();
    app.add_option("--min-count", o.min_count, "Minimum corpus count for a vocabulary token")->capture_default_str();
    app.add_option("--max-doc-fraction", o.max_doc_fraction, "Maximum document fraction for a vocabulary token")
        ->capture_default_str();
    app.add_flag("--keep-case", o.keep_case, "Do not lowercase");
    app.add_flag("--keep-punctuation", o.keep_punctuation, "Do not strip edge punctuation");
    app.add_option("--stopwords", o.stopwords, "Whitespace-separated stopword file")->check(CLI::ExistingFile);
}

void add_split(CLI::App& app, SplitOptions& o) {
    app.add_option("--input", o.input, "JSONL corpus")->required()->check(CLI::ExistingFile);
    app.add_option("--ratios", o.ratios, "train,val,test fractions summing to 1")
        ->delimiter(',')
        ->expected(3)
        ->capture_default_str();
}

void add_train_lda(CLI::App& app, TrainLdaOptions& o) {
    app.add_option("--input", o.input, "Ingested JSONL corpus")->required()->check(CLI::ExistingFile);
    app.add_option("--vocab", o.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app.add_option("--subset", o.subset, "train, val, test, all, or auto (train when split)")->capture_default_str();
    app.add_option("--topics", o.topics, "Number of topics")->capture_default_str();
    app.add_option("--alpha", o.alpha, "Document-topic prior (default 50/topics)");
    app.add_option("--beta", o.beta, "Topic-word prior")->capture_default_str();
    app.add_option("--iterations", o.iterations, "Gibbs sweeps")->capture_default_str();
}

void add_topics(CLI::App& app, TopicsOptions& o) {
    app.add_option("--model", o.model, "LDA model file")->required()->check(CLI::ExistingFile);
    app.add_option("--vocab", o.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app.add_option("--top-n", o.top_n, "Words per topic")->capture_default_str();
    app.add_flag("--probabilities", o.with_probabilities, "Print word probabilities");
}

void add_infer_topics(CLI::App& app, InferTopicsOptions& o) {
    app.add_option("--model", o.model, "LDA model file")->required()->check(CLI::ExistingFile);
    app.add_option("--vocab", o.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app.add_option("--input", o.input, "Ingested JSONL corpus")->required()->check(CLI::ExistingFile);
    app.add_option("--subset", o.subset, "train, val, test, all, or auto (test when split)")->capture_default_str();
    app.add_option("--top-k", o.top_k, "Ranked topics per document")->capture_default_str();
    app.add_option("--iterations", o.iterations, "Fold-in sweeps")->capture_default_str();
    app.add_option("--sample", o.sample, "Report a seeded random sample of this many documents (0 = all)")
        ->capture_default_str();
}

void add_train_clf(CLI::App& app, TrainClfOptions& o) {
    app.add_option("--input", o.input, "Ingested JSONL corpus")->required()->check(CLI::ExistingFile);
    app.add_option("--vocab", o.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app.add_option("--subset", o.subset, "train, val, test, all, or auto (train when split)")->capture_default_str();
    app.add_option("--l2", o.l2, "L2 penalty")->capture_default_str();
    app.add_option("--learning-rate", o.learning_rate, "Gradient step")->capture_default_str();
    app.add_option("--epochs", o.epochs, "Maximum epochs per label")->capture_default_str();
    app.add_option("--tol", o.tol, "Stop when the gradient norm falls below this")->capture_default_str();
    app.add_option("--threshold", o.threshold, "Decision threshold stored in the model")->capture_default_str();
}

void add_predict(CLI::App& app, PredictOptions& o) {
    app.add_option("--input", o.input, "Ingested JSONL corpus")->required()->check(CLI::ExistingFile);
    app.add_option("--model", o.model, "Classifier model file")->check(CLI::ExistingFile);
    app.add_option("--vocab", o.vocab, "Vocabulary file")->check(CLI::ExistingFile);
    app.add_option("--scores", o.scores, "External score CSV; bypasses the local model")->check(CLI::ExistingFile);
    app.add_option("--subset", o.subset, "train, val, test, all, or auto (test when split)")->capture_default_str();
    app.add_option("--labels-out", o.labels_out, "JSONL with thresholded label sets and rankings");
    app.add_option("--threshold", o.threshold, "Override the model's decision threshold");
}

void add_eval(CLI::App& app, EvalOptions& o) {
    app.add_option("--input", o.input, "JSONL corpus with ground truth")->required()->check(CLI::ExistingFile);
    app.add_option("--scores", o.scores, "Score CSV to grade")->check(CLI::ExistingFile);
    app.add_option("--subset", o.subset, "train, val, test, all, or auto (test when split)")->capture_default_str();
    app.add_option("--cutoffs", o.cutoffs, "Cutoffs n for P@n, R@n, S@n")->delimiter(',')->capture_default_str();
    app.add_option("--threshold", o.threshold, "Threshold for exact match")->capture_default_str();
    app.add_flag("--labels-only", o.labels_only, "Skip summary evaluation");
    app.add_flag("--summaries-only", o.summaries_only, "Skip label evaluation");
    app.add_option("--table-out", o.table_out, "Also write the aligned text table here");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Occurrence-report text mining: corpus preparation, topic models, classification, evaluation"};
    app.name("occnlp");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML config file; [command] sections hold per-command options");

    Context ctx{out, err, 0, {}};
    app.add_option("--seed", ctx.seed, "Random seed")->capture_default_str();
    app.add_option("--out", ctx.out_path, "Primary output file");

    IngestOptions ingest;
    SplitOptions split;
    TrainLdaOptions train_lda;
    TopicsOptions topics;
    InferTopicsOptions infer_topics;
    TrainClfOptions train_clf;
    PredictOptions predict;
    EvalOptions eval;

    auto* c_ingest = app.add_subcommand("ingest", "Parse, filter, dedup, tokenize; write JSONL and vocabulary");
    add_ingest(*c_ingest, ingest);
    auto* c_split = app.add_subcommand("split", "Tag documents train/val/test by seeded ratios");
    add_split(*c_split, split);
    auto* c_train_lda = app.add_subcommand("train-lda", "Fit an LDA topic model");
    add_train_lda(*c_train_lda, train_lda);
    auto* c_topics = app.add_subcommand("topics", "List the top words of every topic");
    add_topics(*c_topics, topics);
    auto* c_infer = app.add_subcommand("infer-topics", "Rank the most probable topics per document");
    add_infer_topics(*c_infer, infer_topics);
    auto* c_train_clf = app.add_subcommand("train-clf", "Train the multi-label linear classifier");
    add_train_clf(*c_train_clf, train_clf);
    auto* c_predict = app.add_subcommand("predict", "Score documents and write a score CSV");
    add_predict(*c_predict, predict);
    auto* c_eval = app.add_subcommand("eval", "Evaluate label scores and generated summaries");
    add_eval(*c_eval, eval);

    for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) {
        sub->add_option("--seed", ctx.seed, "Random seed")->capture_default_str();
        sub->add_option("--out", ctx.out_path, "Primary output file");
        sub->footer("Options may also come from --config FILE given before the command, in a [" + sub->get_name() +
                    "] section; flags win over the file.");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "occnlp: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (c_ingest->parsed()) return cmd_ingest(ingest, ctx);
        if (c_split->parsed()) return cmd_split(split, ctx);
        if (c_train_lda->parsed()) return cmd_train_lda(train_lda, ctx);
        if (c_topics->parsed()) return cmd_topics(topics, ctx);
        if (c_infer->parsed()) return cmd_infer_topics(infer_topics, ctx);
        if (c_train_clf->parsed()) return cmd_train_clf(train_clf, ctx);
        if (c_predict->parsed()) return cmd_predict(predict, ctx);
        if (c_eval->parsed()) return cmd_eval(eval, ctx);
    } catch (const ValidationError& e) {
        err << "occnlp: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "occnlp: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "occnlp: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

}  // namespace occnlp::cli
