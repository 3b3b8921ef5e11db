#include <immintrin.h>

#include <cassert>

#include "occnlp/kernels.hpp"

namespace occnlp::kernels::avx2 {

void topic_weights(std::span<const std::int32_t> doc_topic, std::span<const std::int32_t> word_topic,
                   std::span<const std::int32_t> topic_totals, double alpha, double beta, double vbeta,
                   std::span<double> out) {
    assert(doc_topic.size() == out.size() && word_topic.size() == out.size() && topic_totals.size() == out.size());
    const std::size_t n = out.size();
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    const __m256d vvb = _mm256_set1_pd(vbeta);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m128i dt = _mm_loadu_si128(reinterpret_cast<const __m128i*>(doc_topic.data() + k));
        __m128i wt = _mm_loadu_si128(reinterpret_cast<const __m128i*>(word_topic.data() + k));
        __m128i tt = _mm_loadu_si128(reinterpret_cast<const __m128i*>(topic_totals.data() + k));
        __m256d left = _mm256_add_pd(_mm256_cvtepi32_pd(dt), va);
        __m256d right = _mm256_add_pd(_mm256_cvtepi32_pd(wt), vb);
        __m256d denom = _mm256_add_pd(_mm256_cvtepi32_pd(tt), vvb);
        _mm256_storeu_pd(out.data() + k, _mm256_div_pd(_mm256_mul_pd(left, right), denom));
    }
    for (; k < n; ++k) {
        double left = static_cast<double>(doc_topic[k]) + alpha;
        double right = static_cast<double>(word_topic[k]) + beta;
        double denom = static_cast<double>(topic_totals[k]) + vbeta;
        out[k] = left * right / denom;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    const std::size_t n = x.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i + 4), _mm256_loadu_pd(y.data() + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yi = _mm256_loadu_pd(y.data() + i);
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i));
        _mm256_storeu_pd(y.data() + i, _mm256_add_pd(yi, prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), va));
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace occnlp::kernels::avx2
