#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal TOML reader covering what scenario files use: [table] and
// [[array-of-table]] headers, bare/quoted keys, basic and multi-line strings,
// integers, floats, booleans, arrays and inline tables. No dotted keys, no
// dates.

namespace repemp::toml {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& msg)
        : std::runtime_error("toml:" + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

struct Value {
    enum class Kind { String, Int, Float, Bool, Array, Table };
    Kind kind = Kind::Table;

    std::string s;
    long long i = 0;
    double f = 0.0;
    bool b = false;
    std::vector<Value> array;
    std::map<std::string, Value> table;

    bool is_table() const { return kind == Kind::Table; }
    bool is_array() const { return kind == Kind::Array; }

    bool has(const std::string& key) const {
        return kind == Kind::Table && table.count(key) > 0;
    }
    const Value& at(const std::string& key) const;

    std::string as_string() const;
    long long as_int() const;
    double as_float() const; // ints widen
    bool as_bool() const;
    const std::vector<Value>& as_array() const;

    // Lookup helpers with defaults.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_float(const std::string& key, double fallback) const;
};

Value parse(const std::string& text);
Value parse_file(const std::string& path); // throws ParseError / runtime_error

} // namespace repemp::toml
