#include <cassert>

#include "occnlp/kernels.hpp"

namespace occnlp::kernels::scalar {

void topic_weights(std::span<const std::int32_t> doc_topic, std::span<const std::int32_t> word_topic,
                   std::span<const std::int32_t> topic_totals, double alpha, double beta, double vbeta,
                   std::span<double> out) {
    assert(doc_topic.size() == out.size() && word_topic.size() == out.size() && topic_totals.size() == out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        double left = static_cast<double>(doc_topic[k]) + alpha;
        double right = static_cast<double>(word_topic[k]) + beta;
        double denom = static_cast<double>(topic_totals[k]) + vbeta;
        out[k] = left * right / denom;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
    for (auto& v : x) v *= a;
}

}  // namespace occnlp::kernels::scalar
