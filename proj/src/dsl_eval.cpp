#include <string>

#include "dsl_internal.hpp"
#include "repemp/dsl.hpp"

namespace repemp {

Value Value::pitch(int midi) { Value v; v.type = ParamType::Pitch; v.i = midi; return v; }
Value Value::count(int n) { Value v; v.type = ParamType::Count; v.i = n; return v; }
Value Value::steps(int n) { Value v; v.type = ParamType::Steps; v.i = n; return v; }
Value Value::direction(Direction d) { Value v; v.type = ParamType::Direction; v.dir = d; return v; }
Value Value::chord(std::string n) { Value v; v.type = ParamType::Chord; v.name = std::move(n); return v; }
Value Value::pattern(Melody m) { Value v; v.type = ParamType::Pattern; v.mel = std::move(m); return v; }
Value Value::rhythm(std::string n) { Value v; v.type = ParamType::Rhythm; v.name = std::move(n); return v; }
Value Value::latent(int id) { Value v; v.type = ParamType::Latent; v.i = id; return v; }

std::string Value::str() const {
    switch (type) {
    case ParamType::Pitch: return pitch_name(i);
    case ParamType::Count:
    case ParamType::Steps:
    case ParamType::Latent: return std::to_string(i);
    case ParamType::Direction: return to_string(dir);
    case ParamType::Chord:
    case ParamType::Rhythm: return name;
    case ParamType::Pattern: return melody_str(mel);
    }
    return "?";
}

bool operator==(const Value& a, const Value& b) {
    if (a.type != b.type) return false;
    switch (a.type) {
    case ParamType::Pitch:
    case ParamType::Count:
    case ParamType::Steps:
    case ParamType::Latent: return a.i == b.i;
    case ParamType::Direction: return a.dir == b.dir;
    case ParamType::Chord:
    case ParamType::Rhythm: return a.name == b.name;
    case ParamType::Pattern: return a.mel == b.mel;
    }
    return false;
}

namespace {

struct EvalState {
    const EvalContext& ctx;
    long long steps = 0;

    void tick(long long n = 1) {
        steps += n;
        if (steps > ctx.budget)
            throw DslError(DslError::Code::BudgetExhausted,
                           "evaluation budget exhausted (" + std::to_string(ctx.budget) +
                               " steps)");
    }
};

Melody eval_pattern(const Expr& e, const Bindings& env, EvalState& st);

Value eval_scalar(const Expr& e, const Bindings& env, EvalState& st) {
    st.tick();
    switch (e.kind) {
    case Expr::Kind::PitchLit: return Value::pitch(e.ival);
    case Expr::Kind::IntLit: {
        Value v;
        v.type = e.tval;
        v.i = e.ival;
        return v;
    }
    case Expr::Kind::DirLit: return Value::direction(e.dval);
    case Expr::Kind::NameLit: {
        Value v;
        v.type = e.tval;
        v.name = e.sval;
        return v;
    }
    case Expr::Kind::ParamRef: {
        auto it = env.find(e.sval);
        if (it == env.end())
            throw DslError(DslError::Code::UnknownReference, "unbound parameter '" + e.sval + "'");
        return it->second;
    }
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
        Value lhs = eval_scalar(*e.args[0], env, st);
        Value rhs = eval_scalar(*e.args[1], env, st);
        const int delta = e.kind == Expr::Kind::Add ? rhs.i : -rhs.i;
        Value out = lhs;
        out.i = lhs.i + delta;
        return out;
    }
    case Expr::Kind::Call: {
        if (e.sval == "signed") {
            Value d = eval_scalar(*e.args[0], env, st);
            Value s = eval_scalar(*e.args[1], env, st);
            return Value::steps(d.dir == Direction::Up ? s.i : -s.i);
        }
        throw DslError(DslError::Code::TypeMismatch,
                       "call '" + e.sval + "' does not produce a scalar");
    }
    default:
        throw DslError(DslError::Code::TypeMismatch, "expected a scalar expression");
    }
}

Rational eval_rational(const Expr& e) {
    if (e.kind != Expr::Kind::RatLit)
        throw DslError(DslError::Code::TypeMismatch, "expected a rational literal");
    return e.rval;
}

Melody eval_program_call(const Program& callee, const Expr& call, const Bindings& env,
                         EvalState& st) {
    Bindings inner;
    for (std::size_t i = 0; i < callee.params.size(); ++i) {
        const Param& param = callee.params[i];
        const Expr& arg = *call.args[i];
        Value v;
        if (param.type == ParamType::Pattern) v = Value::pattern(eval_pattern(arg, env, st));
        else v = eval_scalar(arg, env, st);
        if (v.type != param.type)
            throw DslError(DslError::Code::BindingMismatch,
                           "argument for '" + param.name + "' has type " + to_string(v.type) +
                               ", expected " + to_string(param.type));
        inner.emplace(param.name, std::move(v));
    }
    return eval_pattern(*callee.body, inner, st);
}

Melody eval_pattern(const Expr& e, const Bindings& env, EvalState& st) {
    st.tick();
    switch (e.kind) {
    case Expr::Kind::MelodyLit:
        st.tick(static_cast<long long>(e.mval.size()));
        return e.mval;
    case Expr::Kind::ParamRef: {
        auto it = env.find(e.sval);
        if (it == env.end())
            throw DslError(DslError::Code::UnknownReference, "unbound parameter '" + e.sval + "'");
        if (it->second.type != ParamType::Pattern)
            throw DslError(DslError::Code::TypeMismatch,
                           "parameter '" + e.sval + "' is not a pattern");
        return it->second.mel;
    }
    case Expr::Kind::Call: break;
    default:
        throw DslError(DslError::Code::TypeMismatch, "expected a melody expression");
    }

    const std::string& fn = e.sval;
    auto note_checked = [](int pitch, Rational dur) {
        Note n{pitch, dur};
        check_note(n);
        return n;
    };

    if (fn == "note") {
        Value p = eval_scalar(*e.args[0], env, st);
        st.tick();
        return Melody{{note_checked(p.i, Rational{1})}};
    }
    if (fn == "concat") {
        Melody out;
        for (const auto& a : e.args) {
            Melody part = eval_pattern(*a, env, st);
            st.tick(static_cast<long long>(part.size()));
            out.append(part);
        }
        return out;
    }
    if (fn == "loop") {
        Value c = eval_scalar(*e.args[0], env, st);
        if (c.i < 0) throw DslError(DslError::Code::Domain, "negative loop count");
        Melody unit = eval_pattern(*e.args[1], env, st);
        Melody out;
        for (int k = 0; k < c.i; ++k) {
            st.tick(static_cast<long long>(unit.size()) + 1);
            out.append(unit);
        }
        return out;
    }
    if (fn == "shift") {
        Melody m = eval_pattern(*e.args[0], env, st);
        Value s = eval_scalar(*e.args[1], env, st);
        for (auto& n : m.notes) {
            st.tick();
            n = note_checked(n.pitch + s.i, n.duration);
        }
        return m;
    }
    if (fn == "stretch") {
        Melody m = eval_pattern(*e.args[0], env, st);
        Rational r = eval_rational(*e.args[1]);
        for (auto& n : m.notes) {
            st.tick();
            n = note_checked(n.pitch, n.duration * r);
        }
        return m;
    }
    if (fn == "accel") {
        Melody m = eval_pattern(*e.args[0], env, st);
        Rational r = eval_rational(*e.args[1]);
        Rational factor{1};
        for (std::size_t i = 0; i < m.notes.size(); ++i) {
            st.tick();
            m.notes[i] = note_checked(m.notes[i].pitch, m.notes[i].duration * factor);
            factor = factor * r;
        }
        return m;
    }
    if (fn == "rhythm_apply") {
        Melody m = eval_pattern(*e.args[0], env, st);
        Value r = eval_scalar(*e.args[1], env, st);
        if (!st.ctx.tables || !st.ctx.tables->rhythms.count(r.name))
            throw DslError(DslError::Code::UnknownReference, "unknown rhythm '" + r.name + "'");
        const auto& durs = st.ctx.tables->rhythms.at(r.name);
        if (m.empty()) return m;
        Melody out;
        for (std::size_t i = 0; i < durs.size(); ++i) {
            st.tick();
            out.notes.push_back(note_checked(m.notes[i % m.size()].pitch, durs[i]));
        }
        return out;
    }
    if (fn == "chord_notes") {
        Value root = eval_scalar(*e.args[0], env, st);
        Value chord = eval_scalar(*e.args[1], env, st);
        Value dir = eval_scalar(*e.args[2], env, st);
        if (!st.ctx.tables || !st.ctx.tables->chords.count(chord.name))
            throw DslError(DslError::Code::UnknownReference, "unknown chord '" + chord.name + "'");
        Melody out;
        for (int off : st.ctx.tables->chords.at(chord.name)) {
            st.tick();
            const int pitch = dir.dir == Direction::Up ? root.i + off : root.i - off;
            out.notes.push_back(note_checked(pitch, Rational{1}));
        }
        return out;
    }
    if (fn == "anchor") {
        Melody m = eval_pattern(*e.args[0], env, st);
        Value p = eval_scalar(*e.args[1], env, st);
        if (m.empty()) return m;
        const int delta = p.i - m.notes[0].pitch;
        for (auto& n : m.notes) {
            st.tick();
            n = note_checked(n.pitch + delta, n.duration);
        }
        return m;
    }
    if (fn == "gen") {
        Value l = eval_scalar(*e.args[0], env, st);
        if (!st.ctx.tables || !st.ctx.tables->latents.count(l.i))
            throw DslError(DslError::Code::UnknownReference,
                           "unknown latent id " + std::to_string(l.i));
        const Melody& m = st.ctx.tables->latents.at(l.i);
        st.tick(static_cast<long long>(m.size()));
        return m;
    }
    if (fn == "ramp") {
        Value start = eval_scalar(*e.args[0], env, st);
        Value count = eval_scalar(*e.args[1], env, st);
        Value step = eval_scalar(*e.args[2], env, st);
        if (count.i < 0) throw DslError(DslError::Code::Domain, "negative ramp count");
        Melody out;
        for (int k = 0; k < count.i; ++k) {
            st.tick();
            out.notes.push_back(note_checked(start.i + k * step.i, Rational{1}));
        }
        return out;
    }

    if (st.ctx.pool) {
        if (const Program* callee = st.ctx.pool->find(fn))
            return eval_program_call(*callee, e, env, st);
    }
    throw DslError(DslError::Code::UnknownReference, "unknown function or program '" + fn + "'");
}

} // namespace

Melody evaluate(const Program& p, const Bindings& bindings, const EvalContext& ctx) {
    if (ctx.budget <= 0)
        throw DslError(DslError::Code::Domain, "evaluation budget must be positive");
    for (const auto& param : p.params) {
        auto it = bindings.find(param.name);
        if (it == bindings.end())
            throw DslError(DslError::Code::BindingMismatch,
                           "missing binding for parameter '" + param.name + "'");
        if (it->second.type != param.type)
            throw DslError(DslError::Code::BindingMismatch,
                           "binding '" + param.name + "' has type " + to_string(it->second.type) +
                               ", expected " + to_string(param.type));
    }
    for (const auto& [name, value] : bindings) {
        (void)value;
        bool known = false;
        for (const auto& param : p.params) known = known || param.name == name;
        if (!known)
            throw DslError(DslError::Code::BindingMismatch,
                           "binding for unknown parameter '" + name + "'");
    }
    EvalState st{ctx};
    return eval_pattern(*p.body, bindings, st);
}

} // namespace repemp
