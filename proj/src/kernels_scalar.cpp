#include "repemp/kernels.hpp"

#include <cmath>

namespace repemp::kernels::scalar {

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double entropy_bits(const double* p, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 0.0) acc -= p[i] * std::log2(p[i]);
    }
    return acc;
}

double rel_entropy_bits(const double* p, const double* q, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 0.0) acc += p[i] * std::log2(p[i] / q[i]);
    }
    return acc;
}

void mul_exp2(const double* p, const double* d, double shift, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = p[i] * std::exp2(d[i] + shift);
}

} // namespace repemp::kernels::scalar
