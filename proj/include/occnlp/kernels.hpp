#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Inner loops of the Gibbs sampler and the linear model, with a portable
// scalar reference and vectorized variants chosen at runtime.
//
// Elementwise kernels (topic_weights, axpy, scale) produce bit-identical
// results on every ISA. Reductions (dot) differ only by summation order.

namespace occnlp::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Unnormalized collapsed-Gibbs conditional for one token:
///   out[k] = (doc_topic[k] + alpha) * (word_topic[k] + beta) / (topic_totals[k] + vbeta)
/// All spans must have the same length.
using TopicWeightsFn = void (*)(std::span<const std::int32_t> doc_topic, std::span<const std::int32_t> word_topic,
                                std::span<const std::int32_t> topic_totals, double alpha, double beta, double vbeta,
                                std::span<double> out);
using DotFn = double (*)(std::span<const double> x, std::span<const double> y);
/// y += a * x
using AxpyFn = void (*)(double a, std::span<const double> x, std::span<double> y);
/// x *= a
using ScaleFn = void (*)(double a, std::span<double> x);

struct KernelTable {
    Isa isa;
    TopicWeightsFn topic_weights;
    DotFn dot;
    AxpyFn axpy;
    ScaleFn scale;
};

bool available(Isa isa) noexcept;

/// Table for a specific ISA. Precondition: available(isa).
const KernelTable& table(Isa isa);

/// Best available table, or the one named by the OCCNLP_ISA environment
/// variable ("scalar", "avx2") when it is set and available.
const KernelTable& active();

namespace scalar {
void topic_weights(std::span<const std::int32_t> doc_topic, std::span<const std::int32_t> word_topic,
                   std::span<const std::int32_t> topic_totals, double alpha, double beta, double vbeta,
                   std::span<double> out);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
}  // namespace scalar

namespace avx2 {
void topic_weights(std::span<const std::int32_t> doc_topic, std::span<const std::int32_t> word_topic,
                   std::span<const std::int32_t> topic_totals, double alpha, double beta, double vbeta,
                   std::span<double> out);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
}  // namespace avx2

}  // namespace occnlp::kernels
