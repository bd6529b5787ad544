#pragma once

#include <map>
#include <string>
#include <vector>

#include "repemp/scenario.hpp"

namespace repemp {

struct ExecutorAction {
    enum class Kind { AddNote, Invoke };
    Kind kind = Kind::AddNote;
    Note note;           // AddNote
    std::string program; // Invoke
    Bindings bindings;   // Invoke

    std::string label() const;
};

struct Episode {
    std::vector<ExecutorAction> actions;
    Melody produced;
    double reward = 0.0;
    std::map<std::string, int> usage; // program id -> invocation count
    int tuning_ops_used = 0;
    std::vector<double> cycle_rewards; // best-so-far after each use-improve cycle
};

// 1 - normalized Levenshtein distance over (pitch, duration) tokens;
// 1.0 iff exact token-sequence match.
double reward(const Melody& m, const Melody& target);

// The finite per-task action alphabet: add_note over the target's notes and
// one invoke per (library program, binding tuple) over the declared or
// derived domains. Canonically ordered; solve's determinism relies on it.
std::vector<ExecutorAction> action_alphabet(const Library& z, const TaskSpec& task,
                                            const ExecutorDomains& domains,
                                            const ScenarioTables& tables);

// Deterministic beam search over append-only action sequences, scoring
// partial melodies by reward against the target. Budget exhaustion returns
// the best episode found.
Episode solve(const Library& z, const TaskSpec& task, const Scenario& s);

// Depth <= t_prime search over deterministic operations (declared crossovers
// and point-mass mutations, applicable abstractions), scored by the reward
// solve achieves; ties prefer fewer actions, then libraries retaining
// higher-usage programs, then the incumbent. t_prime = 0 returns z.
Library tune(const Library& z, const TaskSpec& task, int t_prime, const Scenario& s,
             const std::map<std::string, int>* usage_prior = nullptr);

// Alternates solve and tune, feeding usage back into tune; stops early at
// reward 1. Returns the final library (for curator hand-off) and the best
// episode, with per-cycle best rewards recorded.
std::pair<Library, Episode> use_improve(const Library& z, const TaskSpec& task,
                                        const Scenario& s);

} // namespace repemp
