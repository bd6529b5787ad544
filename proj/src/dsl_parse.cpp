#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "dsl_internal.hpp"
#include "repemp/dsl.hpp"

namespace repemp {

namespace detail {

const std::vector<PrimSig>& primitives() {
    static const std::vector<PrimSig> sigs = {
        {"note", {ArgKind::Pitch}, false, ResultKind::Pattern},
        {"concat", {ArgKind::Pattern}, true, ResultKind::Pattern},
        {"loop", {ArgKind::Count, ArgKind::Pattern}, false, ResultKind::Pattern},
        {"shift", {ArgKind::Pattern, ArgKind::Steps}, false, ResultKind::Pattern},
        {"stretch", {ArgKind::Pattern, ArgKind::RationalArg}, false, ResultKind::Pattern},
        {"accel", {ArgKind::Pattern, ArgKind::RationalArg}, false, ResultKind::Pattern},
        {"rhythm_apply", {ArgKind::Pattern, ArgKind::Rhythm}, false, ResultKind::Pattern},
        {"chord_notes", {ArgKind::Pitch, ArgKind::Chord, ArgKind::Direction}, false,
         ResultKind::Pattern},
        {"signed", {ArgKind::Direction, ArgKind::Steps}, false, ResultKind::Steps},
        {"anchor", {ArgKind::Pattern, ArgKind::Pitch}, false, ResultKind::Pattern},
        {"gen", {ArgKind::Latent}, false, ResultKind::Pattern},
        {"ramp", {ArgKind::Pitch, ArgKind::Count, ArgKind::Steps}, false, ResultKind::Pattern},
    };
    return sigs;
}

const PrimSig* find_primitive(const std::string& name) {
    for (const auto& s : primitives())
        if (name == s.name) return &s;
    return nullptr;
}

std::optional<ArgKind> arg_kind_of(ParamType t) {
    switch (t) {
    case ParamType::Pitch: return ArgKind::Pitch;
    case ParamType::Count: return ArgKind::Count;
    case ParamType::Steps: return ArgKind::Steps;
    case ParamType::Direction: return ArgKind::Direction;
    case ParamType::Chord: return ArgKind::Chord;
    case ParamType::Pattern: return ArgKind::Pattern;
    case ParamType::Rhythm: return ArgKind::Rhythm;
    case ParamType::Latent: return ArgKind::Latent;
    }
    return std::nullopt;
}

} // namespace detail

using detail::ArgKind;

std::string to_string(ParamType t) {
    switch (t) {
    case ParamType::Pitch: return "pitch";
    case ParamType::Count: return "count";
    case ParamType::Steps: return "steps";
    case ParamType::Direction: return "direction";
    case ParamType::Chord: return "chord";
    case ParamType::Pattern: return "pattern";
    case ParamType::Rhythm: return "rhythm";
    case ParamType::Latent: return "latent";
    }
    return "?";
}

std::optional<ParamType> param_type_from(const std::string& name) {
    static const std::pair<const char*, ParamType> table[] = {
        {"pitch", ParamType::Pitch},       {"count", ParamType::Count},
        {"steps", ParamType::Steps},       {"direction", ParamType::Direction},
        {"chord", ParamType::Chord},       {"pattern", ParamType::Pattern},
        {"rhythm", ParamType::Rhythm},     {"latent", ParamType::Latent},
    };
    for (const auto& [n, t] : table)
        if (name == n) return t;
    return std::nullopt;
}

SyntaxError::SyntaxError(SourcePos p, const std::string& exp, const std::string& got)
    : std::runtime_error("syntax error at " + std::to_string(p.line) + ":" +
                         std::to_string(p.col) + ": expected " + exp + ", got " + got),
      pos(p), expected(exp) {}

namespace {

enum class Tok { Ident, Int, LParen, RParen, LBracket, RBracket, Comma, Colon, Plus, Minus, Slash, Arrow, End };

struct Token {
    Tok kind;
    std::string text;
    long long ival = 0;
    SourcePos pos;
};

const char* tok_name(Tok t) {
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Slash: return "'/'";
    case Tok::Arrow: return "'->'";
    case Tok::End: return "end of input";
    }
    return "?";
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    SourcePos pos{1, 1};
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i + k] == '\n') { pos.line++; pos.col = 1; }
            else pos.col++;
        }
        i += n;
    };
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
        const SourcePos at = pos;
        if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            out.push_back({Tok::Arrow, "->", 0, at});
            advance(2);
            continue;
        }
        switch (c) {
        case '(': out.push_back({Tok::LParen, "(", 0, at}); advance(1); continue;
        case ')': out.push_back({Tok::RParen, ")", 0, at}); advance(1); continue;
        case '[': out.push_back({Tok::LBracket, "[", 0, at}); advance(1); continue;
        case ']': out.push_back({Tok::RBracket, "]", 0, at}); advance(1); continue;
        case ',': out.push_back({Tok::Comma, ",", 0, at}); advance(1); continue;
        case ':': out.push_back({Tok::Colon, ":", 0, at}); advance(1); continue;
        case '+': out.push_back({Tok::Plus, "+", 0, at}); advance(1); continue;
        case '-': out.push_back({Tok::Minus, "-", 0, at}); advance(1); continue;
        case '/': out.push_back({Tok::Slash, "/", 0, at}); advance(1); continue;
        default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            Token t{Tok::Int, text.substr(i, j - i), 0, at};
            t.ival = std::stoll(t.text);
            out.push_back(t);
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                    text[j] == '#'))
                ++j;
            out.push_back({Tok::Ident, text.substr(i, j - i), 0, at});
            advance(j - i);
            continue;
        }
        throw SyntaxError(at, "a token", std::string("'") + c + "'");
    }
    out.push_back({Tok::End, "", 0, pos});
    return out;
}

struct Parser {
    const std::vector<Token>& toks;
    std::size_t at = 0;
    const ProgramPool& scope;
    const std::vector<Param>* env = nullptr; // params of the definition being parsed
    std::string self;                        // name of the definition being parsed

    const Token& peek(std::size_t k = 0) const {
        return toks[std::min(at + k, toks.size() - 1)];
    }
    const Token& next() { return toks[at == toks.size() - 1 ? at : at++]; }
    bool accept(Tok t) {
        if (peek().kind == t) { ++at; return true; }
        return false;
    }
    Token expect(Tok t, const std::string& what) {
        if (peek().kind != t) throw SyntaxError(peek().pos, what, tok_name(peek().kind));
        return toks[at++];
    }

    const Param* find_param(const std::string& name) const {
        if (!env) return nullptr;
        for (const auto& p : *env)
            if (p.name == name) return &p;
        return nullptr;
    }

    static std::string kind_desc(ArgKind k) {
        switch (k) {
        case ArgKind::Pitch: return "a pitch";
        case ArgKind::Count: return "a count";
        case ArgKind::Steps: return "a step amount";
        case ArgKind::Direction: return "a direction (up/down)";
        case ArgKind::Chord: return "a chord name";
        case ArgKind::Pattern: return "a melody";
        case ArgKind::Rhythm: return "a rhythm name";
        case ArgKind::Latent: return "a latent id";
        case ArgKind::RationalArg: return "a rational";
        }
        return "?";
    }

    Rational parse_rational() {
        bool neg = accept(Tok::Minus);
        Token n = expect(Tok::Int, "integer");
        std::int64_t num = neg ? -n.ival : n.ival;
        std::int64_t den = 1;
        if (accept(Tok::Slash)) den = expect(Tok::Int, "denominator").ival;
        return Rational(num, den);
    }

    Melody parse_melody_literal() {
        expect(Tok::LBracket, "'['");
        Melody m;
        if (!accept(Tok::RBracket)) {
            while (true) {
                Note note;
                const Token& t = peek();
                if (t.kind == Tok::Int) {
                    next();
                    note.pitch = static_cast<int>(t.ival);
                } else if (t.kind == Tok::Ident) {
                    auto midi = parse_pitch_name(t.text);
                    if (!midi) throw SyntaxError(t.pos, "a note (pitch name or MIDI integer)", "'" + t.text + "'");
                    next();
                    note.pitch = *midi;
                } else {
                    throw SyntaxError(t.pos, "a note (pitch name or MIDI integer)", tok_name(t.kind));
                }
                if (accept(Tok::Colon)) note.duration = parse_rational();
                check_note(note);
                m.notes.push_back(note);
                if (accept(Tok::RBracket)) break;
                expect(Tok::Comma, "',' or ']'");
            }
        }
        return m;
    }

    ExprPtr mk(Expr e) { return std::make_shared<Expr>(std::move(e)); }

    ExprPtr parse_call(const Token& name, ArgKind expected) {
        expect(Tok::LParen, "'('");
        std::vector<ArgKind> argkinds;
        detail::ResultKind result;
        bool variadic = false;
        if (const auto* prim = detail::find_primitive(name.text)) {
            argkinds = prim->args;
            variadic = prim->variadic;
            result = prim->result;
        } else if (const Program* prog = scope.find(name.text)) {
            for (const auto& p : prog->params) argkinds.push_back(*detail::arg_kind_of(p.type));
            result = detail::ResultKind::Pattern;
        } else if (name.text == self) {
            throw DslError(DslError::Code::CyclicCall,
                           "cyclic call reference: '" + name.text + "' calls itself");
        } else {
            throw DslError(DslError::Code::UnknownReference,
                           "unknown function or program '" + name.text + "'");
        }
        const bool want_pattern = expected == ArgKind::Pattern;
        const bool is_pattern = result == detail::ResultKind::Pattern;
        if (want_pattern != is_pattern &&
            !(expected == ArgKind::Steps && result == detail::ResultKind::Steps))
            throw DslError(DslError::Code::TypeMismatch,
                           "'" + name.text + "' does not produce " + kind_desc(expected));
        Expr call;
        call.kind = Expr::Kind::Call;
        call.sval = name.text;
        std::size_t argi = 0;
        if (!accept(Tok::RParen)) {
            while (true) {
                ArgKind k;
                if (argi < argkinds.size()) k = argkinds[argi];
                else if (variadic && !argkinds.empty()) k = argkinds.back();
                else
                    throw DslError(DslError::Code::TypeMismatch,
                                   "'" + name.text + "' takes " + std::to_string(argkinds.size()) +
                                       " arguments");
                call.args.push_back(parse_expr(k));
                ++argi;
                if (accept(Tok::RParen)) break;
                expect(Tok::Comma, "',' or ')'");
            }
        }
        if (argi < argkinds.size() || (argkinds.empty() && argi > 0))
            throw DslError(DslError::Code::TypeMismatch,
                           "'" + name.text + "' takes " + std::to_string(argkinds.size()) +
                               " arguments, got " + std::to_string(argi));
        return mk(std::move(call));
    }

    ExprPtr parse_term(ArgKind expected) {
        const Token& t = peek();
        if (accept(Tok::LParen)) {
            ExprPtr inner = parse_expr(expected);
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (t.kind == Tok::LBracket) {
            if (expected != ArgKind::Pattern)
                throw SyntaxError(t.pos, kind_desc(expected), "a melody literal");
            Expr e;
            e.kind = Expr::Kind::MelodyLit;
            e.mval = parse_melody_literal();
            return mk(std::move(e));
        }
        if (t.kind == Tok::Int || t.kind == Tok::Minus) {
            bool neg = accept(Tok::Minus);
            Token n = expect(Tok::Int, "integer");
            long long v = neg ? -n.ival : n.ival;
            Expr e;
            switch (expected) {
            case ArgKind::Pitch:
                if (v < 0 || v > 127)
                    throw SyntaxError(n.pos, "a MIDI pitch in [0,127]", n.text);
                e.kind = Expr::Kind::PitchLit;
                e.ival = static_cast<int>(v);
                break;
            case ArgKind::Pattern: { // bare MIDI note coerces to a one-note melody
                if (v < 0 || v > 127)
                    throw SyntaxError(n.pos, "a MIDI pitch in [0,127]", n.text);
                e.kind = Expr::Kind::MelodyLit;
                e.mval.notes.push_back(Note{static_cast<int>(v), Rational{1}});
                break;
            }
            case ArgKind::RationalArg: {
                std::int64_t den = 1;
                if (accept(Tok::Slash)) den = expect(Tok::Int, "denominator").ival;
                e.kind = Expr::Kind::RatLit;
                e.rval = Rational(v, den);
                break;
            }
            case ArgKind::Count:
            case ArgKind::Steps:
            case ArgKind::Latent:
                e.kind = Expr::Kind::IntLit;
                e.ival = static_cast<int>(v);
                e.tval = expected == ArgKind::Count  ? ParamType::Count
                         : expected == ArgKind::Steps ? ParamType::Steps
                                                      : ParamType::Latent;
                break;
            default:
                throw SyntaxError(n.pos, kind_desc(expected), "an integer");
            }
            return mk(std::move(e));
        }
        if (t.kind == Tok::Ident) {
            if (peek(1).kind == Tok::LParen) {
                next();
                return parse_call(t, expected);
            }
            next();
            if (const Param* p = find_param(t.text)) {
                bool ok = detail::arg_kind_of(p->type) == expected;
                if (!ok)
                    throw DslError(DslError::Code::TypeMismatch,
                                   "parameter '" + p->name + "' has type " + to_string(p->type) +
                                       ", expected " + kind_desc(expected));
                Expr e;
                e.kind = Expr::Kind::ParamRef;
                e.sval = t.text;
                e.tval = p->type;
                return mk(std::move(e));
            }
            switch (expected) {
            case ArgKind::Direction:
                if (t.text == "up" || t.text == "down") {
                    Expr e;
                    e.kind = Expr::Kind::DirLit;
                    e.dval = t.text == "up" ? Direction::Up : Direction::Down;
                    return mk(std::move(e));
                }
                break;
            case ArgKind::Chord:
            case ArgKind::Rhythm: {
                Expr e;
                e.kind = Expr::Kind::NameLit;
                e.sval = t.text;
                e.tval = expected == ArgKind::Chord ? ParamType::Chord : ParamType::Rhythm;
                return mk(std::move(e));
            }
            case ArgKind::Pitch:
                if (auto midi = parse_pitch_name(t.text)) {
                    Expr e;
                    e.kind = Expr::Kind::PitchLit;
                    e.ival = *midi;
                    return mk(std::move(e));
                }
                break;
            case ArgKind::Pattern:
                if (auto midi = parse_pitch_name(t.text)) { // bare note coerces
                    Expr e;
                    e.kind = Expr::Kind::MelodyLit;
                    e.mval.notes.push_back(Note{*midi, Rational{1}});
                    return mk(std::move(e));
                }
                break;
            default:
                break;
            }
            throw SyntaxError(t.pos, kind_desc(expected), "'" + t.text + "'");
        }
        throw SyntaxError(t.pos, kind_desc(expected), tok_name(t.kind));
    }

    ExprPtr parse_expr(ArgKind expected) {
        ExprPtr lhs = parse_term(expected);
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            if (expected != ArgKind::Pitch && expected != ArgKind::Count &&
                expected != ArgKind::Steps)
                throw SyntaxError(peek().pos, "no operator for " + kind_desc(expected),
                                  tok_name(peek().kind));
            const bool add = next().kind == Tok::Plus;
            ArgKind rhs_kind = expected == ArgKind::Pitch ? ArgKind::Steps : expected;
            ExprPtr rhs = parse_term(rhs_kind);
            Expr e;
            e.kind = add ? Expr::Kind::Add : Expr::Kind::Sub;
            e.args = {lhs, rhs};
            lhs = mk(std::move(e));
        }
        return lhs;
    }
};

// Static constraint: loop trip counts must be literals or count parameters.
void check_loop_bounds(const Expr& e) {
    if (e.kind == Expr::Kind::Call && e.sval == "loop" && !e.args.empty()) {
        const Expr& count = *e.args[0];
        const bool ok = count.kind == Expr::Kind::IntLit ||
                        (count.kind == Expr::Kind::ParamRef && count.tval == ParamType::Count);
        if (!ok)
            throw DslError(DslError::Code::TypeMismatch,
                           "loop trip count must be a literal or a count parameter");
    }
    for (const auto& a : e.args) check_loop_bounds(*a);
}

} // namespace

Program parse_program(const std::string& text, const ProgramPool& scope) {
    const std::vector<Token> toks = tokenize(text);
    if (toks.front().kind == Tok::End)
        throw SyntaxError(toks.front().pos, "a program definition or call", "end of input");

    bool is_definition = false;
    for (const auto& t : toks)
        if (t.kind == Tok::Arrow) { is_definition = true; break; }

    Parser parser{toks, 0, scope, nullptr, {}};

    if (!is_definition) {
        Token name = parser.expect(Tok::Ident, "a function name");
        ExprPtr body = parser.parse_call(name, ArgKind::Pattern);
        parser.expect(Tok::End, "end of input");
        Program p;
        p.body = body;
        p.id = expr_source(*body);
        return p;
    }

    Program p;
    Token name = parser.expect(Tok::Ident, "a program name");
    p.id = name.text;
    parser.expect(Tok::LParen, "'('");
    if (!parser.accept(Tok::RParen)) {
        while (true) {
            Token pname = parser.expect(Tok::Ident, "a parameter name");
            parser.expect(Tok::Colon, "':'");
            Token ptype = parser.expect(Tok::Ident, "a parameter type");
            auto t = param_type_from(ptype.text);
            if (!t)
                throw DslError(DslError::Code::UnknownParamType,
                               "unknown ParamType '" + ptype.text + "'");
            for (const auto& q : p.params)
                if (q.name == pname.text)
                    throw DslError(DslError::Code::TypeMismatch,
                                   "duplicate parameter '" + pname.text + "'");
            p.params.push_back({pname.text, *t});
            if (parser.accept(Tok::RParen)) break;
            parser.expect(Tok::Comma, "',' or ')'");
        }
    }
    parser.expect(Tok::Arrow, "'->'");
    parser.env = &p.params;
    parser.self = p.id;
    p.body = parser.parse_expr(ArgKind::Pattern);
    parser.expect(Tok::End, "end of input");
    check_loop_bounds(*p.body);
    return p;
}

Melody parse_melody(const std::string& text) {
    const std::vector<Token> toks = tokenize(text);
    static const ProgramPool empty_scope;
    Parser parser{toks, 0, empty_scope, nullptr, {}};
    Melody m = parser.parse_melody_literal();
    parser.expect(Tok::End, "end of input");
    return m;
}

namespace {

std::string binop_operand(const Expr& e) {
    const bool is_binop = e.kind == Expr::Kind::Add || e.kind == Expr::Kind::Sub;
    return is_binop ? "(" + expr_source(e) + ")" : expr_source(e);
}

} // namespace

std::string expr_source(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::PitchLit: return pitch_name(e.ival);
    case Expr::Kind::IntLit: return std::to_string(e.ival);
    case Expr::Kind::RatLit: return e.rval.str();
    case Expr::Kind::DirLit: return to_string(e.dval);
    case Expr::Kind::NameLit: return e.sval;
    case Expr::Kind::MelodyLit: return melody_str(e.mval);
    case Expr::Kind::ParamRef: return e.sval;
    case Expr::Kind::Add:
        return binop_operand(*e.args[0]) + " + " + binop_operand(*e.args[1]);
    case Expr::Kind::Sub:
        return binop_operand(*e.args[0]) + " - " + binop_operand(*e.args[1]);
    case Expr::Kind::Call: {
        std::string out = e.sval + "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out += ", ";
            out += expr_source(*e.args[i]);
        }
        return out + ")";
    }
    }
    return "?";
}

std::string program_source(const Program& p) {
    if (p.params.empty() && p.body && p.body->kind == Expr::Kind::Call &&
        p.id == expr_source(*p.body))
        return p.id; // bare bound call
    std::string out = p.id + "(";
    for (std::size_t i = 0; i < p.params.size(); ++i) {
        if (i) out += ", ";
        out += p.params[i].name + ": " + to_string(p.params[i].type);
    }
    out += ") -> ";
    out += expr_source(*p.body);
    return out;
}

bool Expr::equals(const Expr& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
    case Kind::PitchLit:
    case Kind::IntLit:
        if (ival != other.ival || tval != other.tval) return false;
        break;
    case Kind::RatLit:
        if (!(rval == other.rval)) return false;
        break;
    case Kind::DirLit:
        if (dval != other.dval) return false;
        break;
    case Kind::NameLit:
    case Kind::ParamRef:
        if (sval != other.sval || tval != other.tval) return false;
        break;
    case Kind::MelodyLit:
        if (!(mval == other.mval)) return false;
        break;
    case Kind::Call:
        if (sval != other.sval) return false;
        break;
    case Kind::Add:
    case Kind::Sub:
        break;
    }
    if (args.size() != other.args.size()) return false;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (!args[i]->equals(*other.args[i])) return false;
    return true;
}

bool operator==(const Program& a, const Program& b) {
    if (a.id != b.id || a.params != b.params) return false;
    if (!a.body || !b.body) return a.body == b.body;
    return a.body->equals(*b.body);
}

void ProgramPool::add(Program p) {
    if (index_.count(p.id))
        throw DslError(DslError::Code::Domain, "duplicate program id '" + p.id + "'");
    index_[p.id] = programs_.size();
    programs_.push_back(std::move(p));
}

const Program* ProgramPool::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &programs_[it->second];
}

namespace {

void collect_calls(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Call) out.push_back(e.sval);
    for (const auto& a : e.args) collect_calls(*a, out);
}

} // namespace

std::vector<std::string> find_call_cycle(const ProgramPool& pool) {
    // colors: 0 unvisited, 1 on stack, 2 done
    std::map<std::string, int> color;
    std::vector<std::string> stack;
    std::vector<std::string> cycle;

    std::function<bool(const std::string&)> visit = [&](const std::string& id) -> bool {
        color[id] = 1;
        stack.push_back(id);
        const Program* p = pool.find(id);
        if (p && p->body) {
            std::vector<std::string> calls;
            collect_calls(*p->body, calls);
            for (const auto& callee : calls) {
                if (!pool.contains(callee)) continue;
                const int c = color.count(callee) ? color[callee] : 0;
                if (c == 1) {
                    auto it = std::find(stack.begin(), stack.end(), callee);
                    cycle.assign(it, stack.end());
                    return true;
                }
                if (c == 0 && visit(callee)) return true;
            }
        }
        stack.pop_back();
        color[id] = 2;
        return false;
    };

    for (const auto& p : pool.all()) {
        if ((color.count(p.id) ? color[p.id] : 0) == 0 && visit(p.id)) return cycle;
    }
    return {};
}

} // namespace repemp
