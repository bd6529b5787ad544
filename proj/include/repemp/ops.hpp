#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repemp/library.hpp"

namespace repemp {

// Modification-operation kinds. Joint is the channel-facing operation that
// assigns one declared variant to every targeted program at once; its variant
// index decodes to a per-program tuple (mixed radix over the targets'
// declared variant counts).
enum class OpKind { Selection, Crossover, Abstraction, Mutation, Joint };

std::string to_string(OpKind k);

struct Operation {
    OpKind kind = OpKind::Selection;
    std::vector<std::string> targets; // program ids; Selection: ids to keep
    long long variant = 0;
};

using OperationSequence = std::vector<Operation>;

// Finite distribution over successor libraries. Support entries are pairwise
// distinct under library_equal; probabilities sum to 1 within 1e-12.
struct OutcomeDistribution {
    std::vector<std::pair<Library, double>> support;
};

// Scenario-declared crossover variant: splice the target program's body into
// pool program `with` at its pattern-typed parameter `slot`, producing a new
// program called `name`.
struct CrossoverVariant {
    std::string with;
    std::string slot;
    std::string name;
};

struct MutationOutcome {
    std::string replace; // pool program id substituted for the target
    double p = 1.0;
};

// A named mutation variant; deterministic variants have a single outcome.
struct MutationVariant {
    std::string name;
    std::vector<MutationOutcome> outcomes;
};

struct OpTables {
    std::map<std::string, std::vector<CrossoverVariant>> crossover; // by program id
    std::map<std::string, std::vector<MutationVariant>> mutation;   // by program id
    // Preferred id for apply_abstraction(a, b) results, keyed by (a, b).
    std::map<std::pair<std::string, std::string>, std::string> abstraction_names;
};

// Everything the operators need to resolve fragments and compare outcomes.
struct OpsContext {
    const ProgramPool* pool = nullptr;
    const OpTables* tables = nullptr;
    const ProbeSet* probes = nullptr;
    const ScenarioTables* eval_tables = nullptr;
    MelodyEquivalence equivalence;
    long long eval_budget = 10000;

    EvalContext eval() const { return EvalContext{pool, eval_tables, eval_budget}; }
};

class OpError : public std::runtime_error {
public:
    explicit OpError(const std::string& msg) : std::runtime_error(msg) {}
};

// Keeps exactly the listed programs; canonical order preserved.
Library apply_selection(const Library& z, const std::vector<std::string>& keep);

// Adds the declared crossover result for (a, variant). The fragment host is
// named by the variant table; it must exist in the pool (it is usually a
// style fragment, not a library member).
Library apply_crossover(const Library& z, const std::string& a, int variant,
                        const OpsContext& ctx);

// Builds the spliced program for (a, variant) without touching the library.
Program crossover_program(const Program& a, const CrossoverVariant& variant,
                          const OpsContext& ctx);

// Anti-unifies two programs that are identical up to one differing literal
// leaf; adds a generalized program with one extra (prepended) parameter.
// Originals are retained; removal is selection's job.
Library apply_abstraction(const Library& z, const std::string& a, const std::string& b,
                          const OpsContext& ctx);

// True when apply_abstraction would succeed.
bool anti_unifiable(const Program& a, const Program& b);

// Replaces p by the declared mutation outcomes; deterministic edits give a
// point mass, stochastic tables give the declared distribution. Outcomes
// equal under library_equal are merged.
OutcomeDistribution apply_mutation(const Library& z, const std::string& p, int variant,
                                   const OpsContext& ctx);

// Per-program variant choices backing the Joint kind: all declared crossover
// variants followed by all declared mutation variants; a program with no
// declared variants contributes a single "keep" choice.
struct JointOutcome {
    Program program;
    double p = 1.0;
};
struct JointChoice {
    std::string label; // e.g. "staccato" or "latent_7", "keep" for the identity
    std::vector<JointOutcome> outcomes;
};
// One choice list per program of z, in canonical library order.
std::vector<std::vector<JointChoice>> joint_choices(const Library& z, const OpsContext& ctx);

// Number of joint variants for z (product of per-program choice counts).
long long joint_variant_count(const Library& z, const OpsContext& ctx);

// Applies one operation; stochastic operations return a distribution.
OutcomeDistribution apply_operation(const Library& z, const Operation& op, const OpsContext& ctx);

std::string operation_label(const Library& z, const Operation& op, const OpsContext& ctx);

// Composes the per-step outcomes of a sequence, resolving each step against
// the intermediate libraries, and merges equal outcomes. Throws OpError
// naming the failing step when an operation is inapplicable.
OutcomeDistribution outcome_distribution(const Library& z, const OperationSequence& seq,
                                         const OpsContext& ctx);

// Merges support entries with equal library keys; probabilities are summed.
// The representative of each class is the entry with the smallest canonical
// text; support is sorted by it.
OutcomeDistribution merge_outcomes(std::vector<std::pair<Library, double>> entries,
                                   const OpsContext& ctx);

} // namespace repemp
