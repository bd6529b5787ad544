#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "repemp/kernels.hpp"

using namespace repemp;

namespace {

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n, bool with_zeros = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p) {
        x = with_zeros && u(rng) < 0.2 ? 0.0 : -std::log(1.0 - u(rng));
        total += x;
    }
    if (total == 0.0) { p[0] = 1.0; total = 1.0; }
    for (auto& x : p) x /= total;
    return p;
}

} // namespace

TEST_CASE("scalar entropy basics") {
    const std::vector<double> uniform4 = {0.25, 0.25, 0.25, 0.25};
    CHECK(kernels::scalar::entropy_bits(uniform4.data(), 4) == doctest::Approx(2.0).epsilon(1e-14));

    const std::vector<double> point = {0.0, 1.0, 0.0};
    CHECK(kernels::scalar::entropy_bits(point.data(), 3) == 0.0);

    const std::vector<double> half = {0.5, 0.5};
    CHECK(kernels::scalar::entropy_bits(half.data(), 2) == 1.0); // exact
}

TEST_CASE("scalar relative entropy is non-negative and zero on equal") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        const auto p = random_probs(rng, 8);
        const auto q = random_probs(rng, 8);
        CHECK(kernels::scalar::rel_entropy_bits(p.data(), p.data(), 8) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(kernels::scalar::rel_entropy_bits(p.data(), q.data(), 8) >= -1e-12);
    }
}

TEST_CASE("mul_exp2 scalar matches direct arithmetic") {
    const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
    const std::vector<double> d = {0.0, 1.0, -2.0, 0.5};
    std::vector<double> out(4);
    kernels::scalar::mul_exp2(p.data(), d.data(), 0.0, out.data(), 4);
    CHECK(out[0] == doctest::Approx(0.1));
    CHECK(out[1] == doctest::Approx(0.4));
    CHECK(out[2] == doctest::Approx(0.075));
    CHECK(out[3] == doctest::Approx(0.4 * std::exp2(0.5)));
}

#if REPEMP_HAS_AVX2_BACKEND
TEST_CASE("avx2 kernels match scalar reference") {
    if (!kernels::avx2_supported()) {
        MESSAGE("AVX2 not supported on this CPU; skipping equivalence checks");
        return;
    }
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-3.0, 3.0);

    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 257u}) {
        for (int rep = 0; rep < 20; ++rep) {
            const auto p = random_probs(rng, n, true);
            const auto q = random_probs(rng, n);
            std::vector<double> x(n), d(n);
            for (auto& v : x) v = u(rng);
            for (auto& v : d) v = u(rng);

            CHECK(kernels::avx2::sum(x.data(), n) ==
                  doctest::Approx(kernels::scalar::sum(x.data(), n)).epsilon(1e-12));
            CHECK(kernels::avx2::dot(x.data(), d.data(), n) ==
                  doctest::Approx(kernels::scalar::dot(x.data(), d.data(), n)).epsilon(1e-12));

            std::vector<double> ys(x), yv(x);
            kernels::scalar::axpy(0.37, d.data(), ys.data(), n);
            kernels::avx2::axpy(0.37, d.data(), yv.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(yv[i] == doctest::Approx(ys[i]).epsilon(1e-13));

            const double hs = kernels::scalar::entropy_bits(p.data(), n);
            const double hv = kernels::avx2::entropy_bits(p.data(), n);
            CHECK(hv == doctest::Approx(hs).epsilon(1e-12));

            const double rs = kernels::scalar::rel_entropy_bits(p.data(), q.data(), n);
            const double rv = kernels::avx2::rel_entropy_bits(p.data(), q.data(), n);
            CHECK(rv == doctest::Approx(rs).epsilon(1e-11));

            std::vector<double> os(n), ov(n);
            kernels::scalar::mul_exp2(p.data(), d.data(), -0.5, os.data(), n);
            kernels::avx2::mul_exp2(p.data(), d.data(), -0.5, ov.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(ov[i] == doctest::Approx(os[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("avx2 entropy is exact on power-of-two probabilities") {
    if (!kernels::avx2_supported()) return;
    const std::vector<double> p = {0.5, 0.25, 0.125, 0.125};
    // -sum p log2 p = 0.5 + 0.5 + 0.375 + 0.375 = 1.75, every term exact
    CHECK(kernels::avx2::entropy_bits(p.data(), 4) == 1.75);

    const std::vector<double> half = {0.5, 0.5, 0.5, 0.5}; // not a distribution; still exact terms
    CHECK(kernels::avx2::entropy_bits(half.data(), 4) == 2.0);
}

TEST_CASE("avx2 mul_exp2 handles extreme exponents") {
    if (!kernels::avx2_supported()) return;
    const std::vector<double> p = {1.0, 1.0, 0.0, 1.0};
    const std::vector<double> d = {-1080.0, 10.0, 500.0, 0.0};
    std::vector<double> out(4);
    kernels::avx2::mul_exp2(p.data(), d.data(), 0.0, out.data(), 4);
    CHECK(out[0] == doctest::Approx(std::exp2(-1080.0)));
    CHECK(out[1] == 1024.0);
    CHECK(out[2] == 0.0); // zero probability wins over large exponent
    CHECK(out[3] == 1.0);
}
#endif

TEST_CASE("backend selection honors availability") {
    CHECK(kernels::select(kernels::Backend::Scalar));
    CHECK(kernels::backend_name() == "scalar");
    if (kernels::avx2_supported()) {
        CHECK(kernels::select(kernels::Backend::Avx2));
        CHECK(kernels::backend_name() == "avx2");
    }
    CHECK(kernels::select(kernels::Backend::Auto));
}
