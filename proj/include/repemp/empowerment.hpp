#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repemp/ops.hpp"

namespace repemp {

// Exact operation -> outcome channel. Rows are indexed by enumerated
// operation sequences, columns by distinct outcome classes (libraries merged
// under library_equal plus the scenario equivalence). Row-stochastic.
struct Channel {
    std::vector<std::string> input_labels;
    std::vector<std::string> outcome_keys;
    std::vector<Library> outcome_reps; // may be empty for non-library channels
    std::vector<double> matrix;        // row-major, n_inputs x n_outcomes
    std::size_t n_inputs = 0;
    std::size_t n_outcomes = 0;
    std::size_t dropped = 0; // inapplicable sequences excluded from the alphabet

    double at(std::size_t i, std::size_t j) const { return matrix[i * n_outcomes + j]; }
    const double* row(std::size_t i) const { return matrix.data() + i * n_outcomes; }
    bool deterministic() const;
};

struct Policy {
    std::vector<double> weights; // over Channel inputs; non-negative, sums to 1
};

Policy uniform_policy(std::size_t n);

enum class Estimator { Uniform, Capacity };
std::string to_string(Estimator e);

struct EmpowermentReport {
    double diversity_bits = 0.0;
    double uncertainty_bits = 0.0;
    double mi_bits = 0.0;
    std::optional<double> capacity_bits; // filled when a capacity solve ran
    Policy achieving_policy;
    std::size_t n_eff = 0;
    std::size_t n_inputs = 0;
    std::size_t dropped = 0;
    Estimator estimator = Estimator::Uniform;
};

class EnumerationCapError : public std::runtime_error {
public:
    EnumerationCapError(long long required, long long cap, const std::string& context = "")
        : std::runtime_error("enumeration cap exceeded: |Omega|^T = " + std::to_string(required) +
                             " > " + std::to_string(cap) +
                             (context.empty() ? "" : " (" + context + ")")),
          required(required) {}
    long long required;
};

class CapacityError : public std::runtime_error {
public:
    CapacityError(int iters, double gap)
        : std::runtime_error("capacity iteration did not converge after " +
                             std::to_string(iters) + " iterations; residual gap " +
                             std::to_string(gap) + " bits"),
          residual_gap(gap) {}
    double residual_gap;
};

struct ChannelOptions {
    int horizon = 1;
    // "joint": one tuple-valued operation assigning a declared variant to
    // every program; "atomic": each declared operation instance separately.
    std::string omega_mode = "joint";
    long long cap = 1000000;
};

// Complete, exact channel for z. Sequences inapplicable at some step are
// excluded from the input alphabet and counted in Channel::dropped.
Channel enumerate_channel(const Library& z, const OpsContext& ctx, const ChannelOptions& opts);

// Channel capacity in bits with the achieving policy. Deterministic channels
// short-circuit to exactly log2(n_outcomes); otherwise Blahut-Arimoto runs
// until the standard upper/lower bound gap falls below tol.
std::pair<double, Policy> capacity(const Channel& ch, double tol_bits = 1e-9,
                                   int max_iters = 10000);

// Decomposition under a fixed policy: diversity = H(outcome marginal),
// uncertainty = policy-weighted average row entropy, mi = joint mutual
// information (computed directly, not as the difference).
EmpowermentReport mi_decomposition(const Channel& ch, const Policy& pi);

inline std::size_t effective_outcomes(const Channel& ch) { return ch.n_outcomes; }

// Representational empowerment of z. estimator=Capacity gives exact channel
// capacity; estimator=Uniform gives the uniform-policy heuristic (diversity
// = log2(n_eff), uncertainty = uniform average row entropy, mi = difference).
// The capacity solve runs in both modes to fill capacity_bits.
EmpowermentReport rep_emp(const Library& z, const OpsContext& ctx, const ChannelOptions& opts,
                          Estimator estimator, double tol_bits = 1e-9);

} // namespace repemp
