#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "repemp/empowerment.hpp"
#include "repemp/kernels.hpp"

using namespace repemp;

namespace {

// Worked-example fixture: up/down with three style crossovers each.
struct Fixture {
    ProgramPool pool;
    ScenarioTables tables;
    ProbeSet probes;
    OpTables ops;

    Fixture() {
        add("up(n: pitch, steps: steps) -> note(n + signed(up, steps))");
        add("down(n: pitch, steps: steps) -> note(n + signed(down, steps))");
        add("staccato(pattern: pattern) -> stretch(pattern, 1/2)");
        add("smooth(pattern: pattern) -> stretch(pattern, 2)");
        add("accelerando(pattern: pattern) -> accel(pattern, 3/4)");
        add("solo() -> [C4]");
        add("solo_up() -> [C5]");

        probes.values[ParamType::Pitch] = {Value::pitch(60)};
        probes.values[ParamType::Steps] = {Value::steps(6)};

        for (const char* p : {"up", "down"})
            ops.crossover[p] = {{"staccato", "pattern", std::string(p) + "_staccato"},
                                {"smooth", "pattern", std::string(p) + "_smooth"},
                                {"accelerando", "pattern", std::string(p) + "_accelerando"}};
        ops.mutation["solo"] = {{"octave", {{"solo_up", 1.0}}}};
    }

    void add(const std::string& src) { pool.add(parse_program(src, pool)); }

    OpsContext ctx() const {
        OpsContext c;
        c.pool = &pool;
        c.tables = &ops;
        c.probes = &probes;
        c.eval_tables = &tables;
        c.equivalence = MelodyEquivalence{12};
        return c;
    }

    Library lib(std::initializer_list<const char*> ids) const {
        Library out;
        for (const char* id : ids) out.add(*pool.find(id));
        return out;
    }
};

Channel make_channel(std::vector<double> matrix, std::size_t n, std::size_t m) {
    Channel ch;
    ch.n_inputs = n;
    ch.n_outcomes = m;
    ch.matrix = std::move(matrix);
    for (std::size_t i = 0; i < n; ++i) ch.input_labels.push_back("in" + std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) ch.outcome_keys.push_back("out" + std::to_string(j));
    return ch;
}

Channel random_channel(std::mt19937_64& rng, std::size_t n, std::size_t m,
                       bool deterministic = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n * m, 0.0);
    if (deterministic) {
        for (std::size_t i = 0; i < n; ++i) w[i * m + rng() % m] = 1.0;
        return make_channel(std::move(w), n, m);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double x = u(rng) < 0.3 ? 0.0 : -std::log(1.0 - u(rng));
            w[i * m + j] = x;
            total += x;
        }
        if (total == 0.0) { w[i * m + rng() % m] = 1.0; total = 1.0; }
        for (std::size_t j = 0; j < m; ++j) w[i * m + j] /= total;
    }
    // every column must be reachable; rebuild empty columns onto a random row
    for (std::size_t j = 0; j < m; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i) col += w[i * m + j];
        if (col == 0.0) {
            const std::size_t i = rng() % n;
            for (std::size_t jj = 0; jj < m; ++jj) w[i * m + jj] *= 0.5;
            w[i * m + j] += 0.5;
        }
    }
    return make_channel(std::move(w), n, m);
}

Policy random_policy(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Policy pi;
    pi.weights.resize(n);
    double total = 0.0;
    for (auto& x : pi.weights) { x = -std::log(1.0 - u(rng)); total += x; }
    for (auto& x : pi.weights) x /= total;
    return pi;
}

} // namespace

TEST_CASE("Z_A-shaped enumeration: 9 inputs merge to 6 outcome classes") {
    Fixture f;
    Library z = f.lib({"up", "down"});
    Channel ch = enumerate_channel(z, f.ctx(), ChannelOptions{});
    CHECK(ch.n_inputs == 9);
    CHECK(effective_outcomes(ch) == 6);
    CHECK(ch.deterministic());
    CHECK(ch.dropped == 0);
    for (std::size_t i = 0; i < ch.n_inputs; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < ch.n_outcomes; ++j) row += ch.at(i, j);
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("single program with a single deterministic op gives a 1x1 channel") {
    Fixture f;
    Library z = f.lib({"solo"});
    Channel ch = enumerate_channel(z, f.ctx(), ChannelOptions{});
    CHECK(ch.n_inputs == 1);
    CHECK(ch.n_outcomes == 1);
    auto [bits, pi] = capacity(ch);
    CHECK(bits == 0.0);
}

TEST_CASE("capacity of a deterministic channel is exactly log2(n_eff)") {
    // 18 inputs onto 18 distinct outcomes
    std::vector<double> w(18 * 18, 0.0);
    for (std::size_t i = 0; i < 18; ++i) w[i * 18 + i] = 1.0;
    Channel ch = make_channel(std::move(w), 18, 18);
    auto [bits, pi] = capacity(ch);
    CHECK(bits == std::log2(18.0)); // bit-exact shortcut
    CHECK(bits == doctest::Approx(4.169925001442312).epsilon(1e-12));
}

TEST_CASE("capacity of the asymmetric 2-input channel matches the grid oracle") {
    const std::vector<double> w = {1.0, 0.0, 0.5, 0.5};
    Channel ch = make_channel(w, 2, 2);
    auto [bits, pi] = capacity(ch, 1e-9);
    const double oracle = oracles::grid_capacity(w, 2, 2);
    CHECK(bits == doctest::Approx(oracle).epsilon(1e-4));
    // analytic value: log2(5) - 2
    CHECK(bits == doctest::Approx(std::log2(5.0) - 2.0).epsilon(1e-9));
}

TEST_CASE("mi_decomposition: uncertainty of the Z_C-shaped channel is exactly 0.75") {
    // 60 inputs: 15 deterministic rows, 45 half/half rows; 21 outcomes
    const std::size_t n = 60, m = 21;
    std::vector<double> w(n * m, 0.0);
    std::size_t i = 0;
    for (std::size_t rep = 0; rep < 3; ++rep) {
        for (std::size_t k = 0; k < 5; ++k, ++i) w[i * m + (rep * 7 + k)] = 1.0;
        for (std::size_t k = 0; k < 15; ++k, ++i) {
            w[i * m + (rep * 7 + 5)] = 0.5;
            w[i * m + (rep * 7 + 6)] = 0.5;
        }
    }
    REQUIRE(i == n);
    Channel ch = make_channel(std::move(w), n, m);
    EmpowermentReport r = mi_decomposition(ch, uniform_policy(n));
    // 45 rows of exactly 1 bit out of 60; the weighted sum is within one ulp
    CHECK(r.uncertainty_bits == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(r.mi_bits == doctest::Approx(r.diversity_bits - r.uncertainty_bits).epsilon(1e-9));
    // the uniform estimator path divides once and lands exactly on 45/60
    double row_total = 0.0;
    for (std::size_t i2 = 0; i2 < n; ++i2) {
        std::vector<double> row(ch.row(i2), ch.row(i2) + m);
        double h = 0.0;
        for (double p : row)
            if (p > 0.0) h -= p * std::log2(p);
        row_total += h;
    }
    CHECK(row_total / 60.0 == 0.75);
}

TEST_CASE("mi_decomposition: point-mass policy has zero mi") {
    std::mt19937_64 rng(3);
    Channel ch = random_channel(rng, 5, 4);
    Policy point;
    point.weights.assign(5, 0.0);
    point.weights[2] = 1.0;
    EmpowermentReport r = mi_decomposition(ch, point);
    CHECK(r.mi_bits == doctest::Approx(0.0).epsilon(1e-12));
    // for a point mass the marginal equals the chosen row
    CHECK(r.diversity_bits == doctest::Approx(r.uncertainty_bits).epsilon(1e-12));
}

TEST_CASE("mi_decomposition: noiseless uniform channel gives log2(n)") {
    std::vector<double> w(6 * 6, 0.0);
    for (std::size_t i = 0; i < 6; ++i) w[i * 6 + i] = 1.0;
    Channel ch = make_channel(std::move(w), 6, 6);
    EmpowermentReport r = mi_decomposition(ch, uniform_policy(6));
    CHECK(r.mi_bits == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
}

TEST_CASE("decomposition identity holds on randomized channels") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 2 + rng() % 7, m = 2 + rng() % 7;
        Channel ch = random_channel(rng, n, m);
        Policy pi = random_policy(rng, n);
        EmpowermentReport r = mi_decomposition(ch, pi);
        CHECK(std::abs(r.diversity_bits - r.uncertainty_bits - r.mi_bits) <= 1e-9);
    }
}

TEST_CASE("capacity dominates the mi of any tested policy") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 50; ++it) {
        const std::size_t n = 2 + rng() % 5, m = 2 + rng() % 5;
        Channel ch = random_channel(rng, n, m);
        auto [cap_bits, achiever] = capacity(ch, 1e-10);
        for (int k = 0; k < 10; ++k) {
            Policy pi = random_policy(rng, n);
            CHECK(cap_bits + 1e-9 >= mi_decomposition(ch, pi).mi_bits);
        }
        CHECK(cap_bits + 1e-9 >= mi_decomposition(ch, uniform_policy(n)).mi_bits);
        CHECK(cap_bits <= std::log2(static_cast<double>(n)) + 1e-9);
        CHECK(cap_bits <= std::log2(static_cast<double>(m)) + 1e-9);
        CHECK(cap_bits >= -1e-12);
    }
}

TEST_CASE("Blahut-Arimoto matches the brute-force simplex oracle") {
    std::mt19937_64 rng(29);
    for (int it = 0; it < 30; ++it) {
        const std::size_t n = 2 + rng() % 3; // 2..4 inputs
        const std::size_t m = 2 + rng() % 5;
        Channel ch = random_channel(rng, n, m);
        auto [bits, pi] = capacity(ch, 1e-9);
        const double oracle = oracles::grid_capacity(ch.matrix, n, m);
        CHECK(bits == doctest::Approx(oracle).epsilon(1e-3));
    }
}

TEST_CASE("deterministic random channels short-circuit exactly") {
    std::mt19937_64 rng(31);
    for (int it = 0; it < 50; ++it) {
        const std::size_t n = 2 + rng() % 7, m = 2 + rng() % 7;
        Channel raw = random_channel(rng, n, m, true);
        // count distinct reached outcomes
        std::size_t reached = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < n; ++i) col += raw.at(i, j);
            if (col > 0.0) ++reached;
        }
        // rebuild the channel over reached columns only (as enumeration does)
        std::vector<double> w;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double col = 0.0;
                for (std::size_t ii = 0; ii < n; ++ii) col += raw.at(ii, j);
                if (col > 0.0) w.push_back(raw.at(i, j));
            }
        Channel ch = make_channel(std::move(w), n, reached);
        auto [bits, pi] = capacity(ch);
        CHECK(bits == std::log2(static_cast<double>(reached)));
    }
}

TEST_CASE("merging two outcome classes never increases capacity") {
    std::mt19937_64 rng(37);
    for (int it = 0; it < 30; ++it) {
        const std::size_t n = 2 + rng() % 5, m = 3 + rng() % 4;
        Channel ch = random_channel(rng, n, m);
        auto [before, pi1] = capacity(ch, 1e-10);
        // merge the last two columns
        std::vector<double> w(n * (m - 1), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j + 2 < m; ++j) w[i * (m - 1) + j] = ch.at(i, j);
            w[i * (m - 1) + (m - 2)] = ch.at(i, m - 2) + ch.at(i, m - 1);
        }
        Channel merged = make_channel(std::move(w), n, m - 1);
        auto [after, pi2] = capacity(merged, 1e-10);
        CHECK(after <= before + 1e-6);
    }
}

TEST_CASE("rep_emp: Z_A-shaped library under both estimators") {
    Fixture f;
    Library z = f.lib({"up", "down"});
    EmpowermentReport uniform = rep_emp(z, f.ctx(), ChannelOptions{}, Estimator::Uniform);
    CHECK(uniform.n_eff == 6);
    CHECK(uniform.diversity_bits == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
    CHECK(uniform.uncertainty_bits == 0.0);
    CHECK(uniform.mi_bits == doctest::Approx(2.584962500721156).epsilon(1e-9));

    EmpowermentReport cap = rep_emp(z, f.ctx(), ChannelOptions{}, Estimator::Capacity);
    REQUIRE(cap.capacity_bits.has_value());
    CHECK(*cap.capacity_bits == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
}

TEST_CASE("rep_emp: empty library reports zero bits") {
    Fixture f;
    Library empty;
    EmpowermentReport r = rep_emp(empty, f.ctx(), ChannelOptions{}, Estimator::Uniform);
    CHECK(r.mi_bits == 0.0);
    CHECK(r.diversity_bits == 0.0);
    CHECK(r.uncertainty_bits == 0.0);
}

TEST_CASE("enumeration cap is enforced and reported") {
    Fixture f;
    Library z = f.lib({"up", "down"});
    ChannelOptions opts;
    opts.cap = 8; // |Omega| = 9 > 8
    CHECK_THROWS_AS(enumerate_channel(z, f.ctx(), opts), EnumerationCapError);
    try {
        enumerate_channel(z, f.ctx(), opts);
    } catch (const EnumerationCapError& e) {
        CHECK(e.required == 9);
    }
}

TEST_CASE("horizon 2 with replacement semantics drops exhausted sequences") {
    Fixture f;
    // solo has one deterministic mutation replacing it by solo_up; at T=2 the
    // second step targets the vanished id and every sequence drops
    Library z = f.lib({"solo"});
    ChannelOptions opts;
    opts.horizon = 2;
    Channel ch = enumerate_channel(z, f.ctx(), opts);
    CHECK(ch.n_inputs == 0);
    CHECK(ch.dropped == 1);
}

TEST_CASE("kernel backends agree end-to-end on the worked fixture") {
    Fixture f;
    Library z = f.lib({"up", "down"});
    REQUIRE(kernels::select(kernels::Backend::Scalar));
    EmpowermentReport scalar_r = rep_emp(z, f.ctx(), ChannelOptions{}, Estimator::Capacity);
    kernels::select(kernels::Backend::Auto);
    EmpowermentReport auto_r = rep_emp(z, f.ctx(), ChannelOptions{}, Estimator::Capacity);
    CHECK(*scalar_r.capacity_bits == doctest::Approx(*auto_r.capacity_bits).epsilon(1e-12));
    CHECK(scalar_r.mi_bits == doctest::Approx(auto_r.mi_bits).epsilon(1e-11));
    CHECK(scalar_r.n_eff == auto_r.n_eff);
}

TEST_CASE("stochastic-channel capacity decomposes over parallel sub-channels") {
    // three disjoint copies of {5 noiseless symbols + 1 uniform binary row}
    // have capacity log2(3 * (5 + 1)); the solver must find it
    const std::size_t n = 60, m = 21;
    std::vector<double> w(n * m, 0.0);
    std::size_t i = 0;
    for (std::size_t rep = 0; rep < 3; ++rep) {
        for (std::size_t k = 0; k < 5; ++k, ++i) w[i * m + (rep * 7 + k)] = 1.0;
        for (std::size_t k = 0; k < 15; ++k, ++i) {
            w[i * m + (rep * 7 + 5)] = 0.5;
            w[i * m + (rep * 7 + 6)] = 0.5;
        }
    }
    Channel ch = make_channel(std::move(w), n, m);
    auto [bits, pi] = capacity(ch, 1e-9);
    CHECK(bits == doctest::Approx(std::log2(18.0)).epsilon(1e-7));
}

TEST_CASE("policy validation") {
    std::mt19937_64 rng(5);
    Channel ch = random_channel(rng, 4, 4);
    Policy bad;
    bad.weights = {0.5, 0.5}; // wrong size
    CHECK_THROWS_AS(mi_decomposition(ch, bad), std::invalid_argument);
    Policy unnormalized;
    unnormalized.weights = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(mi_decomposition(ch, unnormalized), std::invalid_argument);
}
