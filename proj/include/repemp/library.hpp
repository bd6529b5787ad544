#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "repemp/dsl.hpp"

namespace repemp {

// Canonical bindings per ParamType used to probe program behavior.
struct ProbeSet {
    std::map<ParamType, std::vector<Value>> values;

    // All bindings for p's parameters, last parameter varying fastest.
    // Throws DslError::UnknownReference when a used type has no probes.
    std::vector<Bindings> expand(const Program& p, std::size_t cap = 4096) const;
};

// Ordered list of melody outputs, one per probe binding. Equal fingerprints
// mean the programs are treated as functionally equivalent.
struct Fingerprint {
    std::vector<Melody> outputs;
};

Fingerprint fingerprint(const Program& p, const ProbeSet& probes, const EvalContext& ctx);

// Comparison key under a melodic equivalence; equal keys <=> equal fingerprints.
std::string fingerprint_key(const Fingerprint& fp, const MelodyEquivalence& eq);

// Ordered set of programs, canonically sorted by id, plus per-program
// provenance (originating task index).
class Library {
public:
    Library() = default;
    explicit Library(std::vector<Program> programs);

    void add(Program p, int provenance = 0); // throws on duplicate id
    void remove(const std::string& id);      // throws on unknown id
    const Program* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }

    const std::vector<Program>& programs() const { return programs_; }
    std::vector<std::string> ids() const;
    std::size_t size() const { return programs_.size(); }
    bool empty() const { return programs_.empty(); }

    int provenance_of(const std::string& id) const;
    const std::map<std::string, int>& provenance() const { return provenance_; }

    // Canonical source text, used for deterministic tie-breaking.
    std::string canonical_text() const;

    friend bool operator==(const Library& a, const Library& b);

private:
    std::vector<Program> programs_; // kept sorted by id
    std::map<std::string, int> provenance_;
};

// Multiset-of-fingerprints key; library_equal(a,b) <=> equal keys.
std::string library_key(const Library& lib, const ProbeSet& probes, const MelodyEquivalence& eq,
                        const EvalContext& ctx);

bool library_equal(const Library& a, const Library& b, const ProbeSet& probes,
                   const MelodyEquivalence& eq, const EvalContext& ctx);

nlohmann::ordered_json library_to_json(const Library& lib);
Library library_from_json(const nlohmann::ordered_json& j);

} // namespace repemp
