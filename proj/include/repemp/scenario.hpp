#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repemp/empowerment.hpp"
#include "repemp/ops.hpp"

namespace repemp {

struct TaskSpec {
    int index = 0;
    Melody target;
    int action_budget = 8;
    int beam_width = 8;
    int tune_budget = 0; // T'
    int cycles = 1;
    std::vector<std::string> candidates; // pool ids offered after the task
};

struct CuratorConfig {
    int memory_cap = 8;
    int subset_cap = 2;
    double relevance_threshold = 0.0;
    Estimator estimator = Estimator::Uniform;
};

// Optional overrides for the executor's finite action domains; anything left
// empty is derived from the task target.
struct ExecutorDomains {
    std::vector<int> steps;
    std::vector<int> counts;
    std::vector<Direction> directions;
    std::vector<Melody> extra_patterns;
};

struct Scenario {
    std::string name;
    unsigned long long seed = 0;
    int horizon = 1;
    std::string omega_mode = "joint";
    Estimator estimator = Estimator::Uniform;
    long long enumeration_cap = 1000000;
    long long eval_budget = 10000;

    MelodyEquivalence equivalence;
    ScenarioTables tables;
    ProbeSet probes;
    ProgramPool pool;
    std::map<std::string, Library> libraries; // declaration order irrelevant
    OpTables ops;
    std::vector<TaskSpec> tasks;
    CuratorConfig curator;
    ExecutorDomains executor;

    OpsContext ops_context() const;
    ChannelOptions channel_options() const;
};

class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parses and builds a scenario; throws ScenarioError (or toml::ParseError)
// on malformed input. Program sources may reference only earlier definitions.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_toml_text(const std::string& text);

// Collects every semantic problem (dangling references, probe gaps,
// non-normalized mutation rows, cycles, bad budgets). Empty means valid.
std::vector<std::string> validate(const Scenario& s);

} // namespace repemp
