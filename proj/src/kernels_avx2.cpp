// AVX2 variants of the numeric kernels. Compiled with -mavx2 -mfma in its own
// translation unit; callers reach it only through the runtime dispatch table,
// so the rest of the library stays baseline-ISA.

#include "repemp/kernels.hpp"

#if REPEMP_HAS_AVX2_BACKEND

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace repemp::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// log2 of strictly positive normal doubles.
// Reduction: x = m * 2^e with m in [sqrt(1/2)*?, sqrt(2)); then
// log2(m) = (2/ln2) * atanh(s) with s = (m-1)/(m+1), odd series in s.
// Exact at powers of two (s = 0). Subnormal inputs are not handled; the
// callers only take log2 of probabilities whose magnitude makes the
// contribution of a subnormal negligible, and zero lanes are masked out.
inline __m256d log2_pd(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256i bits = _mm256_castpd_si256(x);

    __m256i expo = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7FF));
    // int64 in [0,2047] -> double via the 2^52 magic constant
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(expo, magic)),
                              _mm256_set1_pd(4503599627370496.0 + 1023.0));

    __m256i mant = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                   _mm256_set1_epi64x(0x3FF0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mant);

    const __m256d sqrt2 = _mm256_set1_pd(1.4142135623730951);
    __m256d over = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), over);
    e = _mm256_add_pd(e, _mm256_and_pd(over, one));

    __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    __m256d z = _mm256_mul_pd(s, s);

    // (2/ln2)/(2k+1), k = 0..7; |s| <= 0.1716 keeps truncation below 2e-14
    const __m256d c7 = _mm256_set1_pd(0.19235933878519512);
    const __m256d c6 = _mm256_set1_pd(0.22195308321368668);
    const __m256d c5 = _mm256_set1_pd(0.26230818925253880);
    const __m256d c4 = _mm256_set1_pd(0.32059889797532520);
    const __m256d c3 = _mm256_set1_pd(0.41219858311113240);
    const __m256d c2 = _mm256_set1_pd(0.57707801635558536);
    const __m256d c1 = _mm256_set1_pd(0.96179669392597560);
    const __m256d c0 = _mm256_set1_pd(2.8853900817779268);

    __m256d poly = c7;
    poly = _mm256_fmadd_pd(poly, z, c6);
    poly = _mm256_fmadd_pd(poly, z, c5);
    poly = _mm256_fmadd_pd(poly, z, c4);
    poly = _mm256_fmadd_pd(poly, z, c3);
    poly = _mm256_fmadd_pd(poly, z, c2);
    poly = _mm256_fmadd_pd(poly, z, c1);
    poly = _mm256_fmadd_pd(poly, z, c0);

    return _mm256_fmadd_pd(s, poly, e);
}

// Builds 2^e for integer-valued e lanes within the normal exponent range.
inline __m256d pow2_from_int(__m256i e64) {
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(e64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
}

// 2^d for d in [-1075, 1023]; exact when d is integral (r = 0).
inline __m256d exp2_pd(__m256d d) {
    const __m256d lo = _mm256_set1_pd(-1075.0);
    const __m256d hi = _mm256_set1_pd(1023.0);
    d = _mm256_min_pd(_mm256_max_pd(d, lo), hi);

    __m256d n = _mm256_round_pd(d, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_sub_pd(d, n);
    __m256d y = _mm256_mul_pd(r, _mm256_set1_pd(0.6931471805599453)); // |y| <= 0.3466

    // exp(y), Taylor to y^11; max truncation ~6e-15
    __m256d p = _mm256_set1_pd(1.0 / 39916800.0);
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, y, _mm256_set1_pd(1.0));

    // split 2^n into two normal-range factors to cover subnormal results
    __m256d n_half = _mm256_round_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d n_rest = _mm256_sub_pd(n, n_half);
    __m256i e1 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n_half));
    __m256i e2 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n_rest));
    return _mm256_mul_pd(_mm256_mul_pd(p, pow2_from_int(e1)), pow2_from_int(e2));
}

} // namespace

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double entropy_bits(const double* p, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(p + i);
        __m256d pos = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
        // masked lanes feed log2 a harmless 1.0 and are zeroed afterwards
        __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), v, pos);
        __m256d term = _mm256_mul_pd(v, log2_pd(safe));
        acc = _mm256_sub_pd(acc, _mm256_and_pd(term, pos));
    }
    double total = hsum(acc);
    for (; i < n; ++i)
        if (p[i] > 0.0) total -= p[i] * std::log2(p[i]);
    return total;
}

double rel_entropy_bits(const double* p, const double* q, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vp = _mm256_loadu_pd(p + i);
        __m256d vq = _mm256_loadu_pd(q + i);
        __m256d pos = _mm256_cmp_pd(vp, zero, _CMP_GT_OQ);
        __m256d ratio = _mm256_div_pd(vp, vq);
        __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), ratio, pos);
        __m256d term = _mm256_mul_pd(vp, log2_pd(safe));
        acc = _mm256_add_pd(acc, _mm256_and_pd(term, pos));
    }
    double total = hsum(acc);
    for (; i < n; ++i)
        if (p[i] > 0.0) total += p[i] * std::log2(p[i] / q[i]);
    return total;
}

void mul_exp2(const double* p, const double* d, double shift, double* out, std::size_t n) {
    const __m256d vshift = _mm256_set1_pd(shift);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vp = _mm256_loadu_pd(p + i);
        __m256d vd = _mm256_add_pd(_mm256_loadu_pd(d + i), vshift);
        __m256d scaled = _mm256_mul_pd(vp, exp2_pd(vd));
        // p == 0 wins regardless of d (avoids 0 * inf)
        __m256d zp = _mm256_cmp_pd(vp, zero, _CMP_EQ_OQ);
        _mm256_storeu_pd(out + i, _mm256_andnot_pd(zp, scaled));
    }
    for (; i < n; ++i) out[i] = p[i] == 0.0 ? 0.0 : p[i] * std::exp2(d[i] + shift);
}

} // namespace repemp::kernels::avx2

#endif // REPEMP_HAS_AVX2_BACKEND
