#include "repemp/empowerment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "repemp/kernels.hpp"

namespace repemp {

bool Channel::deterministic() const {
    for (std::size_t i = 0; i < n_inputs; ++i) {
        const double* r = row(i);
        for (std::size_t j = 0; j < n_outcomes; ++j)
            if (r[j] != 0.0 && r[j] != 1.0) return false;
    }
    return true;
}

Policy uniform_policy(std::size_t n) {
    Policy pi;
    pi.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    return pi;
}

std::string to_string(Estimator e) {
    return e == Estimator::Uniform ? "uniform" : "capacity";
}

namespace {

// Alphabet for one step: either the joint tuple operations or each declared
// atomic operation instance.
std::vector<Operation> step_alphabet(const Library& z, const OpsContext& ctx,
                                     const std::string& mode) {
    std::vector<Operation> ops;
    if (mode == "joint") {
        const long long count = joint_variant_count(z, ctx);
        for (long long v = 0; v < count; ++v) ops.push_back({OpKind::Joint, z.ids(), v});
        return ops;
    }
    // atomic: crossover and mutation variants, applicable abstractions, and
    // single-program drops
    for (const auto& p : z.programs()) {
        if (ctx.tables) {
            auto cit = ctx.tables->crossover.find(p.id);
            if (cit != ctx.tables->crossover.end())
                for (std::size_t v = 0; v < cit->second.size(); ++v)
                    ops.push_back({OpKind::Crossover, {p.id}, static_cast<long long>(v)});
            auto mit = ctx.tables->mutation.find(p.id);
            if (mit != ctx.tables->mutation.end())
                for (std::size_t v = 0; v < mit->second.size(); ++v)
                    ops.push_back({OpKind::Mutation, {p.id}, static_cast<long long>(v)});
        }
    }
    for (const auto& a : z.programs())
        for (const auto& b : z.programs())
            if (a.id != b.id && anti_unifiable(a, b))
                ops.push_back({OpKind::Abstraction, {a.id, b.id}, 0});
    if (z.size() > 1) {
        for (const auto& p : z.programs()) {
            std::vector<std::string> keep;
            for (const auto& q : z.programs())
                if (q.id != p.id) keep.push_back(q.id);
            ops.push_back({OpKind::Selection, keep, 0});
        }
    }
    return ops;
}

} // namespace

Channel enumerate_channel(const Library& z, const OpsContext& ctx, const ChannelOptions& opts) {
    const std::vector<Operation> alphabet = step_alphabet(z, ctx, opts.omega_mode);
    const long long base = static_cast<long long>(alphabet.size());
    __int128 projected = 1;
    for (int t = 0; t < opts.horizon; ++t) {
        projected *= static_cast<__int128>(base);
        if (projected > static_cast<__int128>(opts.cap)) {
            const long long reported =
                projected > (__int128)1 << 62 ? ((long long)1 << 62) : (long long)projected;
            throw EnumerationCapError(reported, opts.cap);
        }
    }
    const long long total = static_cast<long long>(projected);

    const EvalContext eval = ctx.eval();
    std::map<std::string, std::size_t> outcome_index;
    std::vector<Library> outcome_reps;
    std::vector<std::string> outcome_keys;
    std::vector<std::string> input_labels;
    std::vector<std::vector<std::pair<std::size_t, double>>> sparse_rows;
    std::size_t dropped = 0;

    std::vector<long long> digits(static_cast<std::size_t>(std::max(opts.horizon, 0)), 0);
    for (long long seq_index = 0; seq_index < total; ++seq_index) {
        OperationSequence seq;
        long long v = seq_index;
        for (int t = opts.horizon - 1; t >= 0; --t) {
            digits[static_cast<std::size_t>(t)] = base ? v % base : 0;
            v = base ? v / base : 0;
        }
        std::string label;
        for (int t = 0; t < opts.horizon; ++t) {
            const Operation& op = alphabet[static_cast<std::size_t>(digits[static_cast<std::size_t>(t)])];
            seq.push_back(op);
        }
        OutcomeDistribution dist;
        try {
            // label against the starting library; intermediate labels depend
            // on the realized branch and are not stable
            for (int t = 0; t < opts.horizon; ++t) {
                if (t) label += ";";
                label += operation_label(z, seq[static_cast<std::size_t>(t)], ctx);
            }
            dist = outcome_distribution(z, seq, ctx);
        } catch (const OpError&) {
            ++dropped;
            continue;
        }
        std::vector<std::pair<std::size_t, double>> row;
        for (auto& [lib, p] : dist.support) {
            const std::string key = ctx.probes
                                        ? library_key(lib, *ctx.probes, ctx.equivalence, eval)
                                        : lib.canonical_text();
            auto it = outcome_index.find(key);
            std::size_t col;
            if (it == outcome_index.end()) {
                col = outcome_reps.size();
                outcome_index.emplace(key, col);
                outcome_reps.push_back(std::move(lib));
                outcome_keys.push_back(key);
            } else {
                col = it->second;
            }
            row.emplace_back(col, p);
        }
        input_labels.push_back(std::move(label));
        sparse_rows.push_back(std::move(row));
    }

    // degenerate horizon 0: identity channel over the unchanged library
    if (opts.horizon == 0) {
        const std::string key = ctx.probes
                                    ? library_key(z, *ctx.probes, ctx.equivalence, eval)
                                    : z.canonical_text();
        Channel ch;
        ch.input_labels = {"identity"};
        ch.outcome_keys = {key};
        ch.outcome_reps = {z};
        ch.matrix = {1.0};
        ch.n_inputs = 1;
        ch.n_outcomes = 1;
        return ch;
    }

    Channel ch;
    ch.input_labels = std::move(input_labels);
    ch.outcome_keys = std::move(outcome_keys);
    ch.outcome_reps = std::move(outcome_reps);
    ch.n_inputs = ch.input_labels.size();
    ch.n_outcomes = ch.outcome_keys.size();
    ch.dropped = dropped;
    ch.matrix.assign(ch.n_inputs * ch.n_outcomes, 0.0);
    for (std::size_t i = 0; i < sparse_rows.size(); ++i)
        for (const auto& [col, p] : sparse_rows[i]) ch.matrix[i * ch.n_outcomes + col] += p;
    return ch;
}

std::pair<double, Policy> capacity(const Channel& ch, double tol_bits, int max_iters) {
    if (ch.n_inputs == 0 || ch.n_outcomes == 0) return {0.0, Policy{}};
    if (ch.n_outcomes == 1) return {0.0, uniform_policy(ch.n_inputs)};

    if (ch.deterministic()) {
        // capacity = log2(#outcome classes), achieved by a uniform policy
        // over one representative input per class
        Policy pi;
        pi.weights.assign(ch.n_inputs, 0.0);
        std::vector<bool> covered(ch.n_outcomes, false);
        std::size_t classes = 0;
        for (std::size_t i = 0; i < ch.n_inputs && classes < ch.n_outcomes; ++i) {
            const double* r = ch.row(i);
            for (std::size_t j = 0; j < ch.n_outcomes; ++j) {
                if (r[j] == 1.0 && !covered[j]) {
                    covered[j] = true;
                    pi.weights[i] = 1.0;
                    ++classes;
                    break;
                }
            }
        }
        for (auto& w : pi.weights) w /= static_cast<double>(classes);
        return {std::log2(static_cast<double>(ch.n_outcomes)), pi};
    }

    const std::size_t n = ch.n_inputs;
    const std::size_t m = ch.n_outcomes;
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    std::vector<double> q(m, 0.0);
    std::vector<double> d(n, 0.0);

    double lower = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        std::fill(q.begin(), q.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (p[i] > 0.0) kernels::active().axpy(p[i], ch.row(i), q.data(), m);
        double upper = -1e300;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = kernels::active().rel_entropy_bits(ch.row(i), q.data(), m);
            upper = std::max(upper, d[i]);
        }
        lower = kernels::active().dot(p.data(), d.data(), n);
        if (upper - lower <= tol_bits) return {lower, Policy{std::move(p)}};
        kernels::active().mul_exp2(p.data(), d.data(), -upper, p.data(), n);
        const double z = kernels::active().sum(p.data(), n);
        for (auto& w : p) w /= z;
    }
    double gap = 0.0;
    {
        std::fill(q.begin(), q.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (p[i] > 0.0) kernels::active().axpy(p[i], ch.row(i), q.data(), m);
        double upper = -1e300;
        for (std::size_t i = 0; i < n; ++i)
            upper = std::max(upper, kernels::active().rel_entropy_bits(ch.row(i), q.data(), m));
        gap = upper - lower;
    }
    throw CapacityError(max_iters, gap);
}

EmpowermentReport mi_decomposition(const Channel& ch, const Policy& pi) {
    if (pi.weights.size() != ch.n_inputs)
        throw std::invalid_argument("policy size does not match channel inputs");
    double total = 0.0;
    for (double w : pi.weights) {
        if (w < 0.0) throw std::invalid_argument("policy weights must be non-negative");
        total += w;
    }
    if (ch.n_inputs > 0 && std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("policy weights must sum to 1");

    EmpowermentReport r;
    r.n_eff = ch.n_outcomes;
    r.n_inputs = ch.n_inputs;
    r.dropped = ch.dropped;
    if (ch.n_inputs == 0 || ch.n_outcomes == 0) return r;

    std::vector<double> q(ch.n_outcomes, 0.0);
    for (std::size_t i = 0; i < ch.n_inputs; ++i)
        if (pi.weights[i] > 0.0) kernels::active().axpy(pi.weights[i], ch.row(i), q.data(), ch.n_outcomes);

    r.diversity_bits = kernels::active().entropy_bits(q.data(), ch.n_outcomes);
    double uncertainty = 0.0;
    double mi = 0.0;
    for (std::size_t i = 0; i < ch.n_inputs; ++i) {
        if (pi.weights[i] <= 0.0) continue;
        uncertainty += pi.weights[i] * kernels::active().entropy_bits(ch.row(i), ch.n_outcomes);
        mi += pi.weights[i] * kernels::active().rel_entropy_bits(ch.row(i), q.data(), ch.n_outcomes);
    }
    r.uncertainty_bits = uncertainty;
    r.mi_bits = mi;
    return r;
}

EmpowermentReport rep_emp(const Library& z, const OpsContext& ctx, const ChannelOptions& opts,
                          Estimator estimator, double tol_bits) {
    const Channel ch = enumerate_channel(z, ctx, opts);
    auto [cap_bits, achieving] = capacity(ch, tol_bits);

    EmpowermentReport r;
    if (estimator == Estimator::Capacity) {
        r = mi_decomposition(ch, achieving);
    } else {
        const Policy pi = uniform_policy(ch.n_inputs);
        r = mi_decomposition(ch, pi);
        // the uniform heuristic counts classes rather than weighing the
        // realized marginal; the mean row entropy is summed before the single
        // division so integer-valued row entropies stay exact
        r.diversity_bits =
            ch.n_outcomes ? std::log2(static_cast<double>(ch.n_outcomes)) : 0.0;
        if (ch.n_inputs > 0) {
            double row_entropy_total = 0.0;
            for (std::size_t i = 0; i < ch.n_inputs; ++i)
                row_entropy_total += kernels::active().entropy_bits(ch.row(i), ch.n_outcomes);
            r.uncertainty_bits = row_entropy_total / static_cast<double>(ch.n_inputs);
        }
        r.mi_bits = r.diversity_bits - r.uncertainty_bits;
    }
    r.capacity_bits = cap_bits;
    r.achieving_policy = std::move(achieving);
    r.estimator = estimator;
    return r;
}

} // namespace repemp
