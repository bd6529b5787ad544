#include "repemp/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace repemp::toml {

const Value& Value::at(const std::string& key) const {
    if (kind != Kind::Table) throw std::runtime_error("toml: not a table");
    auto it = table.find(key);
    if (it == table.end()) throw std::runtime_error("toml: missing key '" + key + "'");
    return it->second;
}

std::string Value::as_string() const {
    if (kind != Kind::String) throw std::runtime_error("toml: expected a string");
    return s;
}

long long Value::as_int() const {
    if (kind != Kind::Int) throw std::runtime_error("toml: expected an integer");
    return i;
}

double Value::as_float() const {
    if (kind == Kind::Int) return static_cast<double>(i);
    if (kind != Kind::Float) throw std::runtime_error("toml: expected a number");
    return f;
}

bool Value::as_bool() const {
    if (kind != Kind::Bool) throw std::runtime_error("toml: expected a boolean");
    return b;
}

const std::vector<Value>& Value::as_array() const {
    if (kind != Kind::Array) throw std::runtime_error("toml: expected an array");
    return array;
}

std::string Value::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).as_string() : fallback;
}

long long Value::get_int(const std::string& key, long long fallback) const {
    return has(key) ? at(key).as_int() : fallback;
}

double Value::get_float(const std::string& key, double fallback) const {
    return has(key) ? at(key).as_float() : fallback;
}

namespace {

struct Reader {
    const std::string& text;
    std::size_t at = 0;
    int line = 1;

    bool eof() const { return at >= text.size(); }
    char peek() const { return eof() ? '\0' : text[at]; }
    char next() {
        const char c = text[at++];
        if (c == '\n') ++line;
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line, msg); }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) next();
    }

    void skip_ws_comments() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') { next(); continue; }
            if (c == '#') {
                while (!eof() && peek() != '\n') next();
                continue;
            }
            break;
        }
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        next();
    }

    std::string bare_key() {
        std::string out;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
            out += next();
        if (out.empty()) fail("expected a key");
        return out;
    }

    std::string key() {
        if (peek() == '"') return basic_string();
        return bare_key();
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof()) fail("unterminated string");
            char c = next();
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                char e = next();
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail("unsupported escape");
                }
                continue;
            }
            if (c == '\n') fail("newline in basic string");
            out += c;
        }
        return out;
    }

    std::string multiline_string() {
        // caller consumed the opening triple quote
        std::string out;
        // TOML: a newline immediately after the opener is trimmed
        if (peek() == '\n') next();
        else if (peek() == '\r') { next(); if (peek() == '\n') next(); }
        while (true) {
            if (eof()) fail("unterminated multi-line string");
            if (text.compare(at, 3, "\"\"\"") == 0) {
                next(); next(); next();
                return out;
            }
            out += next();
        }
    }

    Value value() {
        skip_inline_ws();
        const char c = peek();
        if (c == '"') {
            if (text.compare(at, 3, "\"\"\"") == 0) {
                next(); next(); next();
                Value v;
                v.kind = Value::Kind::String;
                v.s = multiline_string();
                return v;
            }
            Value v;
            v.kind = Value::Kind::String;
            v.s = basic_string();
            return v;
        }
        if (c == '[') {
            next();
            Value v;
            v.kind = Value::Kind::Array;
            skip_ws_comments();
            while (peek() != ']') {
                v.array.push_back(value());
                skip_ws_comments();
                if (peek() == ',') { next(); skip_ws_comments(); }
                else if (peek() != ']') fail("expected ',' or ']' in array");
            }
            next();
            return v;
        }
        if (c == '{') {
            next();
            Value v;
            v.kind = Value::Kind::Table;
            skip_inline_ws();
            while (peek() != '}') {
                const std::string k = key();
                skip_inline_ws();
                expect('=');
                Value inner = value();
                if (v.table.count(k)) fail("duplicate key '" + k + "'");
                v.table.emplace(k, std::move(inner));
                skip_inline_ws();
                if (peek() == ',') { next(); skip_inline_ws(); }
                else if (peek() != '}') fail("expected ',' or '}' in inline table");
            }
            next();
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::string word = bare_key();
            Value v;
            if (word == "true" || word == "false") {
                v.kind = Value::Kind::Bool;
                v.b = word == "true";
                return v;
            }
            fail("unexpected value '" + word + "'");
        }
        // number
        std::string num;
        if (peek() == '+' || peek() == '-') num += next();
        bool is_float = false;
        while (!eof()) {
            const char d = peek();
            if (std::isdigit(static_cast<unsigned char>(d)) || d == '_') {
                if (d == '_') { next(); continue; }
                num += next();
            } else if (d == '.' || d == 'e' || d == 'E') {
                is_float = true;
                num += next();
                if ((d == 'e' || d == 'E') && (peek() == '+' || peek() == '-')) num += next();
            } else {
                break;
            }
        }
        if (num.empty() || num == "+" || num == "-") fail("expected a value");
        Value v;
        if (is_float) {
            v.kind = Value::Kind::Float;
            v.f = std::stod(num);
        } else {
            v.kind = Value::Kind::Int;
            v.i = std::stoll(num);
        }
        return v;
    }

    void end_of_entry() {
        skip_inline_ws();
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n') next();
        if (!eof() && peek() == '\r') next();
        if (!eof() && peek() != '\n') fail("unexpected trailing content");
    }
};

} // namespace

Value parse(const std::string& text) {
    Reader r{text, 0, 1};
    Value root;
    root.kind = Value::Kind::Table;
    Value* current = &root;

    r.skip_ws_comments();
    while (!r.eof()) {
        if (r.peek() == '[') {
            r.next();
            const bool array_of_tables = r.peek() == '[';
            if (array_of_tables) r.next();
            r.skip_inline_ws();
            const std::string name = r.key();
            r.skip_inline_ws();
            r.expect(']');
            if (array_of_tables) r.expect(']');
            r.end_of_entry();

            if (array_of_tables) {
                Value& slot = root.table[name];
                if (slot.kind == Value::Kind::Table && slot.table.empty() && slot.array.empty())
                    slot.kind = Value::Kind::Array;
                if (slot.kind != Value::Kind::Array) r.fail("'" + name + "' is not an array");
                Value entry;
                entry.kind = Value::Kind::Table;
                slot.array.push_back(std::move(entry));
                current = &slot.array.back();
            } else {
                if (root.table.count(name) && !(root.table[name].is_table() &&
                                                root.table[name].table.empty()))
                    r.fail("duplicate table '" + name + "'");
                Value& slot = root.table[name];
                slot.kind = Value::Kind::Table;
                current = &slot;
            }
        } else {
            const std::string k = r.key();
            r.skip_inline_ws();
            r.expect('=');
            Value v = r.value();
            r.end_of_entry();
            if (current->table.count(k)) r.fail("duplicate key '" + k + "'");
            current->table.emplace(k, std::move(v));
        }
        r.skip_ws_comments();
    }
    return root;
}

Value parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

} // namespace repemp::toml
