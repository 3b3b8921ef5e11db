#include <cstdlib>
#include <string>

#include "occnlp/error.hpp"
#include "occnlp/kernels.hpp"

namespace occnlp::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, scalar::topic_weights, scalar::dot, scalar::axpy, scalar::scale};
#if OCCNLP_HAVE_AVX2
constexpr KernelTable kAvx2{Isa::avx2, avx2::topic_weights, avx2::dot, avx2::axpy, avx2::scale};
#endif

bool cpu_has_avx2() noexcept {
#if OCCNLP_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& select() {
    if (const char* env = std::getenv("OCCNLP_ISA")) {
        std::string name(env);
        if (name == "scalar") return kScalar;
        if (name == "avx2" && available(Isa::avx2)) return table(Isa::avx2);
    }
    if (available(Isa::avx2)) return table(Isa::avx2);
    return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!available(isa)) throw Error("kernel ISA not available: " + std::string(isa_name(isa)));
#if OCCNLP_HAVE_AVX2
    if (isa == Isa::avx2) return kAvx2;
#endif
    return kScalar;
}

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

}  // namespace occnlp::kernels
