#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace occnlp::cli {

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::uint64_t seed = 0;
    std::string out_path;
};

struct IngestOptions {
    std::string input;
    std::string vocab_out;
    std::vector<std::string> require;
    std::size_t max_tokens = 1024;
    int min_count = 1;
    double max_doc_fraction = 1.0;
    bool keep_case = false;
    bool keep_punctuation = false;
    std::string stopwords;
};

struct SplitOptions {
    std::string input;
    std::vector<double> ratios{0.85, 0.05, 0.10};
};

struct TrainLdaOptions {
    std::string input;
    std::string vocab;
    std::string subset = "auto";
    int topics = 40;
    std::optional<double> alpha;
    double beta = 0.01;
    int iterations = 1000;
};

struct TopicsOptions {
    std::string model;
    std::string vocab;
    std::size_t top_n = 10;
    bool with_probabilities = false;
};

struct InferTopicsOptions {
    std::string model;
    std::string vocab;
    std::string input;
    std::string subset = "all";
    std::size_t top_k = 3;
    int iterations = 100;
    std::size_t sample = 0;
};

struct TrainClfOptions {
    std::string input;
    std::string vocab;
    std::string subset = "auto";
    double l2 = 1e-4;
    double learning_rate = 4.0;
    int epochs = 1000;
    double tol = 1e-6;
    double threshold = 0.5;
};

struct PredictOptions {
    std::string model;
    std::string vocab;
    std::string input;
    std::string subset = "auto";
    std::string scores;
    std::string labels_out;
    std::optional<double> threshold;
};

struct EvalOptions {
    std::string input;
    std::string scores;
    std::string subset = "all";
    std::vector<int> cutoffs{1, 2, 5};
    double threshold = 0.5;
    bool labels_only = false;
    bool summaries_only = false;
    std::string table_out;
};

int cmd_ingest(const IngestOptions& o, Context& ctx);
int cmd_split(const SplitOptions& o, Context& ctx);
int cmd_train_lda(const TrainLdaOptions& o, Context& ctx);
int cmd_topics(const TopicsOptions& o, Context& ctx);
int cmd_infer_topics(const InferTopicsOptions& o, Context& ctx);
int cmd_train_clf(const TrainClfOptions& o, Context& ctx);
int cmd_predict(const PredictOptions& o, Context& ctx);
int cmd_eval(const EvalOptions& o, Context& ctx);

}  // namespace occnlp::cli
