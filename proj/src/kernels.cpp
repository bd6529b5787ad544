#include "repemp/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace repemp::kernels {

namespace {

constexpr Dispatch kScalar = {
    "scalar",          scalar::sum,
    scalar::dot,       scalar::axpy,
    scalar::entropy_bits, scalar::rel_entropy_bits,
    scalar::mul_exp2,
};

#if REPEMP_HAS_AVX2_BACKEND
constexpr Dispatch kAvx2 = {
    "avx2",          avx2::sum,
    avx2::dot,       avx2::axpy,
    avx2::entropy_bits, avx2::rel_entropy_bits,
    avx2::mul_exp2,
};
#endif

const Dispatch* g_active = nullptr;

const Dispatch* pick(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return &kScalar;
    case Backend::Avx2:
#if REPEMP_HAS_AVX2_BACKEND
        if (avx2_supported()) return &kAvx2;
#endif
        return nullptr;
    case Backend::Auto:
#if REPEMP_HAS_AVX2_BACKEND
        if (avx2_supported()) return &kAvx2;
#endif
        return &kScalar;
    }
    return nullptr;
}

const Dispatch* initial() {
    Backend b = Backend::Auto;
    if (const char* env = std::getenv("REPEMP_KERNELS")) {
        std::string_view v(env);
        if (v == "scalar") b = Backend::Scalar;
        else if (v == "avx2") b = Backend::Avx2;
    }
    const Dispatch* d = pick(b);
    return d ? d : &kScalar;
}

} // namespace

bool avx2_supported() {
#if REPEMP_HAS_AVX2_BACKEND
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Dispatch& active() {
    if (!g_active) g_active = initial();
    return *g_active;
}

bool select(Backend b) {
    const Dispatch* d = pick(b);
    if (!d) return false;
    g_active = d;
    return true;
}

std::string backend_name() { return active().name; }

} // namespace repemp::kernels
