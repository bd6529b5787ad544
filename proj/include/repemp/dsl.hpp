#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "repemp/melody.hpp"

namespace repemp {

// Parameter types a program may declare. Each has a finite enumerable domain
// declared in the scenario file.
enum class ParamType { Pitch, Count, Steps, Direction, Chord, Pattern, Rhythm, Latent };

std::string to_string(ParamType t);
std::optional<ParamType> param_type_from(const std::string& name);

enum class Direction { Up, Down };
inline std::string to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

struct Param {
    std::string name;
    ParamType type;
    friend bool operator==(const Param& a, const Param& b) {
        return a.name == b.name && a.type == b.type;
    }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree over melody constructors, pitch/steps arithmetic,
// bounded loops and calls into other programs in scope.
struct Expr {
    enum class Kind {
        PitchLit,   // ival = MIDI
        IntLit,     // ival, typed Count/Steps/Latent by slot (tval)
        RatLit,     // rval
        DirLit,     // dval
        NameLit,    // sval = chord or rhythm name (tval distinguishes)
        MelodyLit,  // mval
        ParamRef,   // sval = parameter name, tval = its type
        Add,        // args[0] + args[1]
        Sub,        // args[0] - args[1]
        Call        // sval = function term, args
    };

    Kind kind;
    int ival = 0;
    Rational rval{};
    Direction dval = Direction::Up;
    std::string sval;
    Melody mval;
    ParamType tval = ParamType::Count;
    std::vector<ExprPtr> args;

    bool equals(const Expr& other) const;
};

struct Program {
    // Stable identifier; doubles as the function term used in call sites.
    std::string id;
    std::vector<Param> params;
    ExprPtr body;

    friend bool operator==(const Program& a, const Program& b);
};

// Declaration-ordered program registry; call resolution and fragment lookups
// go through here.
class ProgramPool {
public:
    void add(Program p);
    const Program* find(const std::string& id) const;
    const std::vector<Program>& all() const { return programs_; }
    bool contains(const std::string& id) const { return find(id) != nullptr; }

private:
    std::vector<Program> programs_;
    std::map<std::string, std::size_t> index_;
};

// Scenario-declared lookup tables consulted during evaluation.
struct ScenarioTables {
    std::map<std::string, std::vector<int>> chords;       // name -> semitone offsets
    std::map<std::string, std::vector<Rational>> rhythms; // name -> duration cycle
    std::map<int, Melody> latents;                        // latent id -> generated melody
};

// A runtime parameter value.
struct Value {
    ParamType type = ParamType::Count;
    int i = 0;
    Direction dir = Direction::Up;
    std::string name;
    Melody mel;

    static Value pitch(int midi);
    static Value count(int n);
    static Value steps(int n);
    static Value direction(Direction d);
    static Value chord(std::string name);
    static Value pattern(Melody m);
    static Value rhythm(std::string name);
    static Value latent(int id);

    std::string str() const; // canonical text, used in labels and probe keys
    friend bool operator==(const Value& a, const Value& b);
};

using Bindings = std::map<std::string, Value>;

struct SourcePos {
    int line = 1;
    int col = 1;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(SourcePos pos, const std::string& expected, const std::string& got);
    SourcePos pos;
    std::string expected;
};

// Type errors, unknown references, budget exhaustion, binding mismatches.
class DslError : public std::runtime_error {
public:
    enum class Code {
        UnknownParamType,
        CyclicCall,
        UnknownReference,
        TypeMismatch,
        BudgetExhausted,
        BindingMismatch,
        Domain,
    };
    DslError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    Code code;
};

// Parses either a definition "name(p: type, ...) -> expr" or a bare call
// "repeat(C4, 2)" (which yields a zero-parameter program wrapping the call).
// Argument typing is directed by the callee signature, so literal pitches,
// counts and directions land in the right slots; a bare note in a pattern
// slot is coerced to a one-note melody.
Program parse_program(const std::string& text, const ProgramPool& scope);

Melody parse_melody(const std::string& text);

// Canonical source form; parse_program(program_source(p)) == p structurally.
std::string program_source(const Program& p);
std::string expr_source(const Expr& e);

struct EvalContext {
    const ProgramPool* pool = nullptr;
    const ScenarioTables* tables = nullptr;
    long long budget = 10000;
};

// Deterministic, pure evaluation. Throws DslError on budget exhaustion or
// binding type mismatch.
Melody evaluate(const Program& p, const Bindings& bindings, const EvalContext& ctx);

// Canonical JSON (field order fixed); round-trips bit-exact.
nlohmann::ordered_json program_to_json(const Program& p);
Program program_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json melody_to_json(const Melody& m);
Melody melody_from_json(const nlohmann::ordered_json& j);

// Detects call cycles in a pool; returns the ids on a cycle (empty if none).
std::vector<std::string> find_call_cycle(const ProgramPool& pool);

} // namespace repemp
