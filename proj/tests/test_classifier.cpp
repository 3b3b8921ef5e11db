#include <doctest.h>

#include <cmath>
#include <random>

#include "occnlp/classifier.hpp"
#include "occnlp/error.hpp"

using namespace occnlp;

namespace {

SparseVector sparse(std::size_t dim, std::vector<std::pair<TokenId, double>> entries) { return {dim, std::move(entries)}; }

/// Two labels, each keyed to a disjoint keyword, with shared filler.
struct Toy {
    std::vector<SparseVector> x;
    std::vector<LabelSet> y;
    std::vector<std::string> names{"A", "B"};
};

Toy toy_set() {
    TfidfFeaturizer f(std::vector<double>(6, 1.0));
    Toy t;
    std::vector<std::vector<TokenId>> docs{{0, 2, 3}, {0, 3, 4}, {1, 2, 5}, {1, 4, 5}, {0, 1, 2}, {3, 4, 5}};
    std::vector<LabelSet> labels{{0}, {0}, {1}, {1}, {0, 1}, {}};
    for (std::size_t i = 0; i < docs.size(); ++i) {
        t.x.push_back(f.featurize(docs[i]));
        t.y.push_back(labels[i]);
    }
    return t;
}

}  // namespace

TEST_CASE("featurize") {
    TfidfFeaturizer f({1.0, 2.0, 3.0});
    CHECK(f.featurize({}).entries.empty());
    std::vector<TokenId> one{2};
    CHECK(f.featurize(one) == sparse(3, {{2, 1.0}}));
    std::vector<TokenId> aab{0, 0, 1};
    auto x = f.featurize(aab);
    REQUIRE(x.entries.size() == 2);
    CHECK(x.entries[0].second == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(x.entries[1].second == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    std::vector<TokenId> oov{7, -1};
    CHECK(f.featurize(oov).entries.empty());
}

TEST_CASE("idf from document frequencies") {
    Vocabulary v({"a", "b"}, {3, 0}, 3);
    auto f = TfidfFeaturizer::from_vocabulary(v);
    CHECK(f.idf()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.idf()[1] == doctest::Approx(std::log(4.0) + 1.0).epsilon(1e-15));
    for (auto w : f.idf()) CHECK(w > 0);
}

TEST_CASE("sigmoid and predict_proba") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
    for (double z : {-1e6, -800.0, -40.0, 0.0, 40.0, 800.0, 1e6}) {
        double p = sigmoid(z);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }

    MultiLabelLinearModel m;
    m.weights = Matrix<double>(3, 4);
    m.bias = {0, 0, 0};
    m.label_names = {"x", "y", "z"};
    auto p = predict_proba(m, sparse(4, {{1, 1.0}}));
    CHECK(p == std::vector<double>{0.5, 0.5, 0.5});
    CHECK_THROWS_AS(predict_proba(m, sparse(5, {})), ValidationError);

    m.bias = {std::log(3.0), 2.0, 2.0};
    p = predict_proba(m, sparse(4, {}));
    CHECK(p[0] == doctest::Approx(0.75));
    CHECK(p[0] + p[1] + p[2] > 1.0);  // independent scores
}

TEST_CASE("predict_labels uses a strict threshold") {
    std::vector<double> p{0.9, 0.5, 0.51};
    CHECK(predict_labels(p, 0.5) == LabelSet{0, 2});
    std::vector<double> low{0.1, 0.2};
    CHECK(predict_labels(low, 0.5).empty());
    std::vector<double> some{0.0, 0.3};
    CHECK(predict_labels(some, 0.0) == LabelSet{1});

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> q(6);
        for (auto& x : q) x = u(rng);
        double t1 = u(rng), t2 = u(rng);
        if (t1 > t2) std::swap(t1, t2);
        auto hi = predict_labels(q, t2), lo = predict_labels(q, t1);
        for (auto l : hi) CHECK(lo.contains(l));
    }
}

TEST_CASE("rank_labels") {
    std::vector<double> p{0.1, 0.9, 0.5};
    CHECK(rank_labels(p) == std::vector<LabelId>{1, 2, 0});
    std::vector<double> tie{0.5, 0.5};
    CHECK(rank_labels(tie) == std::vector<LabelId>{0, 1});

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> u(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> q(7), mapped(7);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] = u(rng) / 10.0;
            mapped[i] = std::exp(3 * q[i]) - 2;  // strictly increasing
        }
        CHECK(rank_labels(q) == rank_labels(mapped));
    }
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> n(0, 1);
    const std::size_t dim = 12;
    std::vector<SparseVector> x;
    std::vector<std::uint8_t> y;
    for (int d = 0; d < 25; ++d) {
        SparseVector v{dim, {}};
        for (TokenId i = 0; i < static_cast<TokenId>(dim); ++i)
            if (rng() % 3 == 0) v.entries.emplace_back(i, n(rng));
        x.push_back(v);
        y.push_back(rng() % 2);
    }
    BinaryLogisticObjective obj(x, y, dim, 0.3);
    std::vector<double> w(dim), g(dim), probe(dim);
    const double h = 1e-5;
    for (int point = 0; point < 20; ++point) {
        for (auto& v : w) v = n(rng);
        double b = n(rng);
        double gb = obj.gradient(w, b, g);
        double diff2 = 0, ref2 = 0;
        for (std::size_t i = 0; i <= dim; ++i) {
            double fd;
            if (i < dim) {
                probe = w;
                probe[i] += h;
                double up = obj.value(probe, b);
                probe[i] -= 2 * h;
                fd = (up - obj.value(probe, b)) / (2 * h);
            } else {
                fd = (obj.value(w, b + h) - obj.value(w, b - h)) / (2 * h);
            }
            double an = i < dim ? g[i] : gb;
            diff2 += (an - fd) * (an - fd);
            ref2 += an * an;
        }
        CHECK(std::sqrt(diff2 / ref2) < 1e-5);
    }
}

TEST_CASE("training separates a keyword toy set with non-increasing loss") {
    auto t = toy_set();
    TrainConfig cfg;
    std::vector<std::vector<double>> losses(2);
    auto m = train(t.x, t.y, t.names, cfg, [&](std::size_t l, int, double loss) { losses[l].push_back(loss); });
    for (std::size_t d = 0; d < t.x.size(); ++d) {
        auto p = predict_proba(m, t.x[d]);
        for (auto l : t.y[d]) CHECK(p[static_cast<std::size_t>(l)] > 0.5);
        CHECK(predict_labels(p, m.threshold) == t.y[d]);
    }
    for (const auto& series : losses) {
        REQUIRE(series.size() > 1);
        for (std::size_t i = 1; i < series.size(); ++i) CHECK(series[i] <= series[i - 1] + 1e-15);
    }
}

TEST_CASE("heavy regularization shrinks weights to zero") {
    auto t = toy_set();
    TrainConfig cfg;
    cfg.l2_lambda = 1e4;
    cfg.learning_rate = 1e-4;
    cfg.epochs = 20000;
    cfg.convergence_tol = 1e-10;
    auto m = train(t.x, t.y, t.names, cfg);
    double norm = 0;
    for (auto w : m.weights.data()) norm += w * w;
    CHECK(std::sqrt(norm) < 1e-4);
    for (const auto& x : t.x) {
        auto p = predict_proba(m, x);
        for (std::size_t l = 0; l < 2; ++l) CHECK(p[l] == doctest::Approx(sigmoid(m.bias[l])).epsilon(1e-4));
    }
    // Bias settles at the base rate of the label (3 of 6 documents).
    CHECK(sigmoid(m.bias[0]) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("training preconditions") {
    auto t = toy_set();
    std::vector<std::string> names{"A", "B", "Never"};
    try {
        train(t.x, t.y, names, TrainConfig{});
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("Never") != std::string::npos);
    }
    TrainConfig zero;
    zero.epochs = 0;
    CHECK_THROWS_AS(train(t.x, t.y, t.names, zero), ValidationError);
    TrainConfig neg;
    neg.l2_lambda = -1;
    CHECK_THROWS_AS(neg.validate(), ValidationError);
    CHECK_THROWS_AS(train({}, {}, t.names, TrainConfig{}), ValidationError);
}

TEST_CASE("training is deterministic and the model file round-trips") {
    auto t = toy_set();
    TrainConfig cfg;
    cfg.epochs = 50;
    auto a = train(t.x, t.y, t.names, cfg);
    auto b = train(t.x, t.y, t.names, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);

    Vocabulary vocab({"f0", "f1", "f2", "f3", "f4", "f5"}, {1, 1, 1, 1, 1, 1}, 6);
    a.idf.assign(6, 1.0);
    auto text = save_classifier(a, vocab);
    auto back = load_classifier(text, vocab);
    CHECK(back.weights == a.weights);
    CHECK(back.bias == a.bias);
    CHECK(back.label_names == a.label_names);
    CHECK(back.threshold == a.threshold);
    CHECK(save_classifier(back, vocab) == text);

    Vocabulary other({"g0", "f1", "f2", "f3", "f4", "f5"}, {1, 1, 1, 1, 1, 1}, 6);
    CHECK_THROWS_AS(load_classifier(text, other), ValidationError);
}

TEST_CASE("import_scores") {
    auto m = import_scores("doc_id,A,B,C\nr1,0.1,0.9,0.5\nr2,1,0,0.25\n");
    CHECK(m.doc_ids == std::vector<std::string>{"r1", "r2"});
    CHECK(m.label_names == std::vector<std::string>{"A", "B", "C"});
    CHECK(m.scores.rows() == 2);
    CHECK(m.scores.cols() == 3);
    CHECK(m.scores(1, 0) == 1.0);

    try {
        import_scores("doc_id,A,B\nr1,0.5,1.2\n");
        FAIL("expected a range error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("column 3") != std::string::npos);
    }
    CHECK_THROWS_AS(import_scores("id,A\n"), ParseError);
    CHECK_THROWS_AS(import_scores("doc_id,A\nr1,abc\n"), ParseError);
    CHECK_THROWS_AS(import_scores("doc_id,A\nr1,0.1,0.2\n"), ParseError);
    CHECK_THROWS_AS(import_scores("doc_id,A\nr1,0.1\nr1,0.2\n"), ParseError);

    auto shuffled = import_scores("doc_id,A,B,C\nr2,1,0,0.25\nr1,0.1,0.9,0.5\n");
    Corpus c;
    c.documents.push_back({"r1", "", {}, {}, {}, {}, {}});
    c.documents.push_back({"r2", "", {}, {}, {}, {}, {}});
    c.documents.push_back({"r3", "", {}, {}, {}, {}, {}});
    auto a = align_scores(m, c), b = align_scores(shuffled, c);
    CHECK(a.doc_ids == b.doc_ids);
    CHECK(a.scores == b.scores);

    Corpus small;
    small.documents.push_back({"r1", "", {}, {}, {}, {}, {}});
    CHECK_THROWS_AS(align_scores(m, small), ValidationError);

    CHECK(export_scores(import_scores(export_scores(m))) == export_scores(m));
}
