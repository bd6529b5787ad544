#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "repemp/dsl.hpp"

namespace repemp::detail {

// Argument slot kinds for primitive signatures. Mirrors ParamType plus a
// rational-literal slot used by the duration transforms.
enum class ArgKind { Pitch, Count, Steps, Direction, Chord, Pattern, Rhythm, Latent, RationalArg };

enum class ResultKind { Pattern, Steps };

struct PrimSig {
    const char* name;
    std::vector<ArgKind> args;
    bool variadic; // trailing args repeat the last kind
    ResultKind result;
};

const PrimSig* find_primitive(const std::string& name);
const std::vector<PrimSig>& primitives();

std::optional<ArgKind> arg_kind_of(ParamType t);

} // namespace repemp::detail
