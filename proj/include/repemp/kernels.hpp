#pragma once

#include <cstddef>
#include <span>
#include <string>

// Numeric inner loops shared by the capacity solver and the entropy
// decomposition. Scalar reference kernels live in kernels_scalar.cpp; an AVX2
// variant of each is selected at runtime when the CPU supports it. The two
// backends are equivalence-tested against each other.
//
// Conventions: probabilities are plain doubles, entropies are in bits,
// 0*log(0) terms contribute 0.

namespace repemp::kernels {

namespace scalar {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
// -sum p_i log2 p_i
double entropy_bits(const double* p, std::size_t n);
// sum_{p_i>0} p_i log2(p_i / q_i)
double rel_entropy_bits(const double* p, const double* q, std::size_t n);
// out_i = p_i * 2^(d_i + shift)
void mul_exp2(const double* p, const double* d, double shift, double* out, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define REPEMP_HAS_AVX2_BACKEND 1
namespace avx2 {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double entropy_bits(const double* p, std::size_t n);
double rel_entropy_bits(const double* p, const double* q, std::size_t n);
void mul_exp2(const double* p, const double* d, double shift, double* out, std::size_t n);
} // namespace avx2
#else
#define REPEMP_HAS_AVX2_BACKEND 0
#endif

struct Dispatch {
    const char* name;
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*entropy_bits)(const double*, std::size_t);
    double (*rel_entropy_bits)(const double*, const double*, std::size_t);
    void (*mul_exp2)(const double*, const double*, double, double*, std::size_t);
};

enum class Backend { Auto, Scalar, Avx2 };

bool avx2_supported();

// Active table. Initial selection honors REPEMP_KERNELS=scalar|avx2|auto.
const Dispatch& active();
// Returns false (and leaves the table untouched) if the backend is unavailable.
bool select(Backend b);
std::string backend_name();

// Span convenience wrappers over the active table.
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}
inline double entropy_bits(std::span<const double> p) {
    return active().entropy_bits(p.data(), p.size());
}
inline double rel_entropy_bits(std::span<const double> p, std::span<const double> q) {
    return active().rel_entropy_bits(p.data(), q.data(), p.size());
}
inline void mul_exp2(std::span<const double> p, std::span<const double> d, double shift,
                     std::span<double> out) {
    active().mul_exp2(p.data(), d.data(), shift, out.data(), p.size());
}

} // namespace repemp::kernels
