#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "occnlp/classifier.hpp"
#include "occnlp/cli.hpp"
#include "occnlp/corpus.hpp"
#include "occnlp/util.hpp"
#include "support/synthetic_reports.hpp"

namespace fs = std::filesystem;
using occnlp::read_file;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = occnlp::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("occnlp-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

/// ingest + split over `n` synthetic reports; returns the split corpus path.
std::string prepare(const TempDir& dir, std::size_t n = 100) {
    write(dir / "raw.jsonl", support::to_raw_jsonl(support::synthetic_reports(n, 5)));
    REQUIRE(run({"ingest", "--input", dir / "raw.jsonl", "--out", dir / "corpus.jsonl", "--vocab-out", dir / "vocab.txt"}).code == 0);
    REQUIRE(run({"split", "--input", dir / "corpus.jsonl", "--out", dir / "split.jsonl", "--seed", "3"}).code == 0);
    return dir / "split.jsonl";
}

}  // namespace

TEST_CASE("cli: help and usage errors") {
    auto help = run({"--help"});
    CHECK(help.code == 0);
    for (const char* cmd : {"ingest", "split", "train-lda", "topics", "infer-topics", "train-clf", "predict", "eval"})
        CHECK(help.out.find(cmd) != std::string::npos);
    auto sub = run({"train-lda", "--help"});
    CHECK(sub.code == 0);
    for (const char* flag : {"--input", "--vocab", "--topics", "--alpha", "--beta", "--iterations", "--seed", "--out"})
        CHECK(sub.out.find(flag) != std::string::npos);
    CHECK(run({"ingest", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("cli: ingest") {
    TempDir dir;
    write(dir / "raw.jsonl",
          "{\"id\":\"a\",\"text\":\"Bird strike on climb.\",\"labels\":[\"Bird strike\"],\"reference_summary\":\"birds\"}\n"
          "{\"id\":\"b\",\"text\":\"bird strike on climb\",\"labels\":[\"Bird strike\"]}\n"
          "{\"id\":\"c\",\"text\":\"Crew was tired.\",\"labels\":[\"Fatigue\"],\"reference_summary\":\"tired\"}\n"
          "{\"id\":\"d\",\"text\":\"no summary here\",\"labels\":[]}\n");

    SUBCASE("dedup, filter, write corpus and vocabulary") {
        auto r = run({"ingest", "--input", dir / "raw.jsonl", "--out", dir / "out.jsonl", "--vocab-out", dir / "v.txt",
                      "--require", "reference_summary"});
        REQUIRE(r.code == 0);
        auto corpus = occnlp::parse_jsonl(read_file(dir / "out.jsonl"));
        REQUIRE(corpus.size() == 2);
        CHECK(corpus.documents[0].id == "a");
        CHECK(corpus.documents[1].id == "c");
        auto vocab = occnlp::Vocabulary::parse(read_file(dir / "v.txt"));
        CHECK(vocab.n_docs() == 2);
        CHECK(occnlp::decode(corpus.documents[1].tokens, vocab) == std::vector<std::string>{"crew", "was", "tired"});
    }
    SUBCASE("reruns are byte-identical") {
        std::vector<std::string> args{"ingest", "--input", dir / "raw.jsonl", "--out", dir / "o.jsonl", "--vocab-out", dir / "v.txt"};
        REQUIRE(run(args).code == 0);
        auto first = read_file(dir / "o.jsonl") + read_file(dir / "v.txt");
        REQUIRE(run(args).code == 0);
        CHECK(read_file(dir / "o.jsonl") + read_file(dir / "v.txt") == first);
    }
    SUBCASE("length cap counts normalized tokens") {
        REQUIRE(run({"ingest", "--input", dir / "raw.jsonl", "--out", dir / "o.jsonl", "--vocab-out", dir / "v.txt",
                     "--max-tokens", "3"}).code == 0);
        auto corpus = occnlp::parse_jsonl(read_file(dir / "o.jsonl"));
        REQUIRE(corpus.size() == 2);  // "crew was tired" and "no summary here"
    }
    SUBCASE("missing input is a usage error and writes nothing") {
        auto r = run({"ingest", "--input", dir / "absent.jsonl", "--out", dir / "o.jsonl", "--vocab-out", dir / "v.txt"});
        CHECK(r.code == 2);
        CHECK_FALSE(fs::exists(dir / "o.jsonl"));
    }
    SUBCASE("malformed input names the line and leaves no partial output") {
        write(dir / "bad.jsonl", "{\"id\":\"a\",\"text\":\"fine\"}\n{\"id\":\"b\"}\n");
        auto r = run({"ingest", "--input", dir / "bad.jsonl", "--out", dir / "o.jsonl", "--vocab-out", dir / "v.txt"});
        CHECK(r.code == 2);
        CHECK(r.err.find("line 2") != std::string::npos);
        CHECK_FALSE(fs::exists(dir / "o.jsonl"));
        CHECK_FALSE(fs::exists(dir / "v.txt"));
        std::size_t leftovers = 0;
        for (const auto& e : fs::directory_iterator(dir.path())) leftovers += e.path().string().find(".tmp-") != std::string::npos;
        CHECK(leftovers == 0);
    }
}

TEST_CASE("cli: split") {
    TempDir dir;
    write(dir / "raw.jsonl", support::to_raw_jsonl(support::synthetic_reports(100, 1)));
    REQUIRE(run({"ingest", "--input", dir / "raw.jsonl", "--out", dir / "c.jsonl", "--vocab-out", dir / "v.txt"}).code == 0);

    REQUIRE(run({"split", "--input", dir / "c.jsonl", "--out", dir / "s1.jsonl", "--seed", "9", "--ratios", "0.85,0.05,0.10"}).code == 0);
    auto tagged = occnlp::parse_jsonl(read_file(dir / "s1.jsonl"));
    CHECK(occnlp::select_split(tagged, "train").size() == 85);
    CHECK(occnlp::select_split(tagged, "val").size() == 5);
    CHECK(occnlp::select_split(tagged, "test").size() == 10);

    REQUIRE(run({"--seed", "9", "split", "--input", dir / "c.jsonl", "--out", dir / "s2.jsonl"}).code == 0);
    CHECK(read_file(dir / "s1.jsonl") == read_file(dir / "s2.jsonl"));

    CHECK(run({"split", "--input", dir / "c.jsonl", "--out", dir / "s3.jsonl", "--ratios", "0.5,0.2,0.2"}).code == 2);
    CHECK_FALSE(fs::exists(dir / "s3.jsonl"));
}

TEST_CASE("cli: topic model commands") {
    TempDir dir;
    auto split = prepare(dir);
    REQUIRE(run({"train-lda", "--input", split, "--vocab", dir / "vocab.txt", "--out", dir / "lda.json", "--topics", "4",
                 "--iterations", "30"}).code == 0);

    auto topics = run({"topics", "--model", dir / "lda.json", "--vocab", dir / "vocab.txt", "--top-n", "10"});
    REQUIRE(topics.code == 0);
    CHECK(count_lines(topics.out) == 4);
    std::istringstream first(topics.out.substr(0, topics.out.find('\n')));
    std::string line;
    std::getline(first, line);
    CHECK(std::count(line.begin(), line.end(), ',') == 9);

    auto inferred = run({"infer-topics", "--model", dir / "lda.json", "--vocab", dir / "vocab.txt", "--input", split,
                         "--subset", "test", "--top-k", "3", "--iterations", "20"});
    REQUIRE(inferred.code == 0);
    CHECK(inferred.out.starts_with("doc_id,rank,topic,probability\n"));
    CHECK(count_lines(inferred.out) == 1 + 10 * 3);

    auto sampled = run({"infer-topics", "--model", dir / "lda.json", "--vocab", dir / "vocab.txt", "--input", split,
                        "--sample", "6", "--top-k", "3", "--iterations", "5", "--seed", "2"});
    REQUIRE(sampled.code == 0);
    CHECK(count_lines(sampled.out) == 1 + 6 * 3);

    CHECK(run({"topics", "--model", dir / "missing.json", "--vocab", dir / "vocab.txt"}).code == 2);
    write(dir / "other-vocab.txt", "#occnlp-vocab version=1 docs=1 config=0\nzzz\t1\n");
    CHECK(run({"topics", "--model", dir / "lda.json", "--vocab", dir / "other-vocab.txt"}).code == 2);
    CHECK(run({"infer-topics", "--model", dir / "lda.json", "--vocab", dir / "vocab.txt", "--input", split, "--top-k", "5"}).code == 2);
}

TEST_CASE("cli: classifier commands and evaluation") {
    TempDir dir;
    auto split = prepare(dir, 200);
    REQUIRE(run({"train-clf", "--input", split, "--vocab", dir / "vocab.txt", "--out", dir / "clf.json"}).code == 0);
    REQUIRE(run({"predict", "--model", dir / "clf.json", "--vocab", dir / "vocab.txt", "--input", split, "--out",
                 dir / "scores.csv", "--labels-out", dir / "labels.jsonl"}).code == 0);

    auto scores = occnlp::import_scores(read_file(dir / "scores.csv"));
    auto test = occnlp::select_split(occnlp::parse_jsonl(read_file(split)), "test");
    CHECK(scores.doc_ids.size() == test.size());
    CHECK(count_lines(read_file(dir / "labels.jsonl")) == test.size());

    auto ev = run({"eval", "--input", split, "--subset", "test", "--scores", dir / "scores.csv", "--out", dir / "report.csv",
                   "--table-out", dir / "report.txt"});
    REQUIRE(ev.code == 0);
    auto csv = read_file(dir / "report.csv");
    for (const char* m : {"P@1", "P@2", "P@5", "R@1", "R@2", "R@5", "S@1", "S@2", "S@5", "EM", "R1.precision", "R1.recall",
                          "R2.precision", "R2.recall", "RL.precision", "RL.recall"})
        CHECK(csv.find(std::string("\n") + m + ",") != std::string::npos);
    CHECK(read_file(dir / "report.txt") == ev.out);

    SUBCASE("summary-only evaluation") {
        auto r = run({"eval", "--input", split, "--summaries-only", "--out", dir / "rouge.csv"});
        REQUIRE(r.code == 0);
        CHECK(count_lines(read_file(dir / "rouge.csv")) == 7);
    }
    SUBCASE("external scores bypass the model") {
        std::string ext = "doc_id,Fatigue,Engine\n";
        for (const auto& d : test.documents) ext += d.id + ",0.9,0.1\n";
        write(dir / "external.csv", ext);
        REQUIRE(run({"predict", "--scores", dir / "external.csv", "--input", split, "--out", dir / "ext-out.csv"}).code == 0);
        auto back = occnlp::import_scores(read_file(dir / "ext-out.csv"));
        CHECK(back.label_names == std::vector<std::string>{"Fatigue", "Engine"});
        CHECK(back.scores(0, 0) == 0.9);
    }
    SUBCASE("errors") {
        // No scores and no summaries.
        write(dir / "plain.jsonl", support::to_raw_jsonl(support::synthetic_reports(5, 1), false));
        CHECK(run({"eval", "--input", dir / "plain.jsonl"}).code == 2);
        // Scores for a document outside the corpus.
        write(dir / "stray.csv", "doc_id,Fatigue\nnot-a-doc,0.5\n");
        CHECK(run({"eval", "--input", split, "--scores", dir / "stray.csv"}).code == 2);
        // Token ids beyond the vocabulary the model was trained on.
        write(dir / "tiny-vocab.txt", "#occnlp-vocab version=1 docs=1 config=0\naaa\t1\n");
        CHECK(run({"predict", "--model", dir / "clf.json", "--vocab", dir / "tiny-vocab.txt", "--input", split, "--out",
                   dir / "x.csv"}).code == 2);
        CHECK(run({"predict", "--model", dir / "nope.json", "--vocab", dir / "vocab.txt", "--input", split, "--out", dir / "x.csv"}).code == 2);
        CHECK_FALSE(fs::exists(dir / "x.csv"));
    }
}

TEST_CASE("cli: config file supplies options and flags win") {
    TempDir dir;
    write(dir / "raw.jsonl", support::to_raw_jsonl(support::synthetic_reports(20, 2)));
    REQUIRE(run({"ingest", "--input", dir / "raw.jsonl", "--out", dir / "c.jsonl", "--vocab-out", dir / "v.txt"}).code == 0);
    write(dir / "run.toml", "seed = 4\n[split]\nratios = [0.5, 0.25, 0.25]\n");

    REQUIRE(run({"--config", dir / "run.toml", "split", "--input", dir / "c.jsonl", "--out", dir / "a.jsonl"}).code == 0);
    auto a = occnlp::parse_jsonl(read_file(dir / "a.jsonl"));
    CHECK(occnlp::select_split(a, "train").size() == 10);
    REQUIRE(run({"split", "--input", dir / "c.jsonl", "--out", dir / "b.jsonl", "--seed", "4", "--ratios", "0.5,0.25,0.25"}).code == 0);
    CHECK(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"));

    REQUIRE(run({"--config", dir / "run.toml", "split", "--input", dir / "c.jsonl", "--out", dir / "c2.jsonl", "--ratios",
                 "0.7,0.15,0.15"}).code == 0);
    CHECK(occnlp::select_split(occnlp::parse_jsonl(read_file(dir / "c2.jsonl")), "train").size() == 14);
}
