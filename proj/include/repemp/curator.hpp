#pragma once

#include <optional>
#include <string>
#include <vector>

#include "repemp/executor.hpp"
#include "repemp/scenario.hpp"

namespace repemp {

struct CuratorState {
    Library current;    // Z_{k-1}
    Library candidates; // newly acquired programs, ids disjoint from current
    int task_index = 0;
};

struct ComposeSpec {
    enum class Kind { Abstraction, Crossover };
    Kind kind = Kind::Abstraction;
    std::string a;
    std::string b; // abstraction partner; empty for crossover
    int variant = 0;
};

struct CuratorAction {
    enum class Kind { NoOp, IntegrateSubset, ComposeThenIntegrate, PruneSubset };
    Kind kind = Kind::NoOp;
    std::vector<std::string> integrate; // candidate ids pulled in
    std::optional<ComposeSpec> compose;
    std::vector<std::string> prune; // ids removed at the end

    std::string label() const;
};

// Keeps candidates that proved useful: with threshold <= 0 the filter is
// disabled and everything passes; otherwise a candidate must have been used
// in the episode and the episode reward must reach the threshold.
Library relevance_filter(const Library& candidates, const Episode& episode, double threshold);

// Finite action list: candidate subsets up to the subset cap, each optionally
// followed by one abstraction/crossover compose step, prune subsets restoring
// the memory cap, and always no-op. Actions whose result would exceed the
// memory cap are emitted with minimal prune subsets attached.
std::vector<CuratorAction> enumerate_actions(const CuratorState& state, const CuratorConfig& cfg,
                                             const OpsContext& ctx);

// Resolves an action into the resulting library. Throws OpError when the
// action is inapplicable.
Library apply_curator_action(const CuratorState& state, const CuratorAction& action,
                             const OpsContext& ctx);

struct ActionEvaluation {
    CuratorAction action;
    Library library;
    EmpowermentReport report;
};

std::vector<ActionEvaluation> evaluate_actions(const CuratorState& state, const Scenario& s,
                                               Estimator estimator);

// Greedy argmax over evaluations; ties broken by fewer programs, then
// lexicographically smaller canonical serialization, then enumeration order.
const ActionEvaluation& choose_action(const std::vector<ActionEvaluation>& evals);

struct CurateResult {
    Library library;
    EmpowermentReport report;
    CuratorAction action;
};

CurateResult curate_step(const CuratorState& state, const Scenario& s, Estimator estimator);

} // namespace repemp
