#include "repemp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "repemp/toml.hpp"

namespace repemp {

OpsContext Scenario::ops_context() const {
    OpsContext ctx;
    ctx.pool = &pool;
    ctx.tables = &ops;
    ctx.probes = &probes;
    ctx.eval_tables = &tables;
    ctx.equivalence = equivalence;
    ctx.eval_budget = eval_budget;
    return ctx;
}

ChannelOptions Scenario::channel_options() const {
    ChannelOptions opts;
    opts.horizon = horizon;
    opts.omega_mode = omega_mode;
    opts.cap = enumeration_cap;
    return opts;
}

namespace {

Rational rational_from_text(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
}

int pitch_from_toml(const toml::Value& v) {
    if (v.kind == toml::Value::Kind::Int) return static_cast<int>(v.i);
    auto midi = parse_pitch_name(v.as_string());
    if (!midi) throw ScenarioError("bad pitch value '" + v.as_string() + "'");
    return *midi;
}

Estimator estimator_from(const std::string& name) {
    if (name == "uniform") return Estimator::Uniform;
    if (name == "capacity") return Estimator::Capacity;
    throw ScenarioError("unknown estimator '" + name + "' (expected uniform or capacity)");
}

void load_probes(const toml::Value& section, Scenario& s) {
    for (const auto& [key, arr] : section.table) {
        auto type = param_type_from(key);
        if (!type) throw ScenarioError("probes: unknown ParamType '" + key + "'");
        std::vector<Value> values;
        for (const auto& v : arr.as_array()) {
            switch (*type) {
            case ParamType::Pitch: values.push_back(Value::pitch(pitch_from_toml(v))); break;
            case ParamType::Count: values.push_back(Value::count(static_cast<int>(v.as_int()))); break;
            case ParamType::Steps: values.push_back(Value::steps(static_cast<int>(v.as_int()))); break;
            case ParamType::Latent: values.push_back(Value::latent(static_cast<int>(v.as_int()))); break;
            case ParamType::Direction:
                values.push_back(Value::direction(v.as_string() == "up" ? Direction::Up
                                                                        : Direction::Down));
                break;
            case ParamType::Chord: values.push_back(Value::chord(v.as_string())); break;
            case ParamType::Rhythm: values.push_back(Value::rhythm(v.as_string())); break;
            case ParamType::Pattern: values.push_back(Value::pattern(parse_melody(v.as_string()))); break;
            }
        }
        s.probes.values[*type] = std::move(values);
    }
}

} // namespace

Scenario scenario_from_toml_text(const std::string& text) {
    const toml::Value root = toml::parse(text);
    Scenario s;

    if (root.has("scenario")) {
        const toml::Value& top = root.at("scenario");
        s.name = top.get_string("name", "");
        s.seed = static_cast<unsigned long long>(top.get_int("seed", 0));
        s.horizon = static_cast<int>(top.get_int("horizon", 1));
        s.omega_mode = top.get_string("omega", "joint");
        s.estimator = estimator_from(top.get_string("estimator", "uniform"));
        s.enumeration_cap = top.get_int("enumeration_cap", 1000000);
        s.eval_budget = top.get_int("eval_budget", 10000);
    }

    if (root.has("equivalence"))
        s.equivalence.pitch_mod =
            static_cast<int>(root.at("equivalence").get_int("pitch_classes", 0));

    if (root.has("chords"))
        for (const auto& [name, arr] : root.at("chords").table) {
            std::vector<int> offsets;
            for (const auto& v : arr.as_array()) offsets.push_back(static_cast<int>(v.as_int()));
            s.tables.chords[name] = std::move(offsets);
        }

    if (root.has("rhythms"))
        for (const auto& [name, arr] : root.at("rhythms").table) {
            std::vector<Rational> durs;
            for (const auto& v : arr.as_array()) durs.push_back(rational_from_text(v.as_string()));
            s.tables.rhythms[name] = std::move(durs);
        }

    if (root.has("latents"))
        for (const auto& [id, v] : root.at("latents").table)
            s.tables.latents[std::stoi(id)] = parse_melody(v.as_string());

    if (root.has("probes")) load_probes(root.at("probes"), s);

    if (root.has("program"))
        for (const auto& entry : root.at("program").as_array()) {
            Program p = parse_program(entry.at("source").as_string(), s.pool);
            if (entry.has("id") && entry.at("id").as_string() != p.id)
                throw ScenarioError("program id '" + entry.at("id").as_string() +
                                    "' does not match definition '" + p.id + "'");
            s.pool.add(std::move(p));
        }

    if (root.has("library"))
        for (const auto& entry : root.at("library").as_array()) {
            const std::string id = entry.at("id").as_string();
            if (s.libraries.count(id)) throw ScenarioError("duplicate library id '" + id + "'");
            Library lib;
            for (const auto& pid : entry.at("programs").as_array()) {
                const Program* p = s.pool.find(pid.as_string());
                if (!p)
                    throw ScenarioError("library '" + id + "' references unknown program '" +
                                        pid.as_string() + "'");
                lib.add(*p, 0);
            }
            s.libraries.emplace(id, std::move(lib));
        }

    if (root.has("crossover"))
        for (const auto& entry : root.at("crossover").as_array()) {
            const std::string program = entry.at("program").as_string();
            std::vector<CrossoverVariant> variants;
            for (const auto& v : entry.at("variants").as_array()) {
                CrossoverVariant var;
                var.with = v.at("with").as_string();
                var.slot = v.at("slot").as_string();
                var.name = v.has("name") ? v.at("name").as_string()
                                         : program + "_" + var.with;
                variants.push_back(std::move(var));
            }
            s.ops.crossover[program] = std::move(variants);
        }

    if (root.has("mutation"))
        for (const auto& entry : root.at("mutation").as_array()) {
            const std::string program = entry.at("program").as_string();
            std::vector<MutationVariant> variants;
            for (const auto& v : entry.at("variants").as_array()) {
                MutationVariant var;
                var.name = v.at("name").as_string();
                for (const auto& o : v.at("outcomes").as_array())
                    var.outcomes.push_back(
                        {o.at("replace").as_string(), o.get_float("p", 1.0)});
                variants.push_back(std::move(var));
            }
            s.ops.mutation[program] = std::move(variants);
        }

    if (root.has("abstraction"))
        for (const auto& entry : root.at("abstraction").as_array())
            s.ops.abstraction_names[{entry.at("a").as_string(), entry.at("b").as_string()}] =
                entry.at("name").as_string();

    if (root.has("curator")) {
        const toml::Value& c = root.at("curator");
        s.curator.memory_cap = static_cast<int>(c.get_int("memory_cap", 8));
        s.curator.subset_cap = static_cast<int>(c.get_int("subset_cap", 2));
        s.curator.relevance_threshold = c.get_float("relevance_threshold", 0.0);
        s.curator.estimator = estimator_from(c.get_string("estimator", "uniform"));
    }

    if (root.has("executor")) {
        const toml::Value& e = root.at("executor");
        if (e.has("steps"))
            for (const auto& v : e.at("steps").as_array())
                s.executor.steps.push_back(static_cast<int>(v.as_int()));
        if (e.has("counts"))
            for (const auto& v : e.at("counts").as_array())
                s.executor.counts.push_back(static_cast<int>(v.as_int()));
        if (e.has("directions"))
            for (const auto& v : e.at("directions").as_array())
                s.executor.directions.push_back(v.as_string() == "up" ? Direction::Up
                                                                      : Direction::Down);
        if (e.has("extra_patterns"))
            for (const auto& v : e.at("extra_patterns").as_array())
                s.executor.extra_patterns.push_back(parse_melody(v.as_string()));
    }

    if (root.has("task"))
        for (const auto& entry : root.at("task").as_array()) {
            TaskSpec t;
            t.index = static_cast<int>(entry.get_int("index",
                                                     static_cast<long long>(s.tasks.size()) + 1));
            t.target = parse_melody(entry.at("target").as_string());
            t.action_budget = static_cast<int>(entry.get_int("action_budget", 8));
            t.beam_width = static_cast<int>(entry.get_int("beam_width", 8));
            t.tune_budget = static_cast<int>(entry.get_int("tune_budget", 0));
            t.cycles = static_cast<int>(entry.get_int("cycles", 1));
            if (entry.has("candidates"))
                for (const auto& c : entry.at("candidates").as_array())
                    t.candidates.push_back(c.as_string());
            s.tasks.push_back(std::move(t));
        }

    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return scenario_from_toml_text(text);
}

namespace {

void collect_body_refs(const Expr& e, std::vector<const Expr*>& name_lits,
                       std::vector<const Expr*>& latents) {
    if (e.kind == Expr::Kind::NameLit) name_lits.push_back(&e);
    if (e.kind == Expr::Kind::Call && e.sval == "gen" && !e.args.empty() &&
        e.args[0]->kind == Expr::Kind::IntLit)
        latents.push_back(e.args[0].get());
    for (const auto& a : e.args) collect_body_refs(*a, name_lits, latents);
}

} // namespace

std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> issues;
    auto issue = [&](const std::string& msg) { issues.push_back(msg); };

    // ids creatable by declared compositions, in addition to the pool
    std::set<std::string> known_ids;
    for (const auto& p : s.pool.all()) known_ids.insert(p.id);
    for (const auto& [pair, name] : s.ops.abstraction_names) known_ids.insert(name);
    for (const auto& [prog, variants] : s.ops.crossover)
        for (const auto& v : variants) known_ids.insert(v.name);

    if (s.horizon < 0) issue("scenario: horizon must be >= 0");
    if (s.enumeration_cap < 1) issue("scenario: enumeration_cap must be >= 1");
    if (s.eval_budget < 1) issue("scenario: eval_budget must be >= 1");
    if (s.omega_mode != "joint" && s.omega_mode != "atomic")
        issue("scenario: omega must be 'joint' or 'atomic'");
    if (s.equivalence.pitch_mod < 0) issue("equivalence: pitch_classes must be >= 0");

    const auto cycle = find_call_cycle(s.pool);
    if (!cycle.empty()) {
        std::string msg = "program call cycle:";
        for (const auto& id : cycle) msg += " " + id;
        issue(msg);
    }

    // probe coverage + table references used by program bodies
    for (const auto& p : s.pool.all()) {
        for (const auto& param : p.params) {
            auto it = s.probes.values.find(param.type);
            if (it == s.probes.values.end() || it->second.empty())
                issue("probes: no values for ParamType '" + to_string(param.type) +
                      "' used by program '" + p.id + "'");
        }
        std::vector<const Expr*> name_lits, latents;
        collect_body_refs(*p.body, name_lits, latents);
        for (const Expr* e : name_lits) {
            if (e->tval == ParamType::Chord && !s.tables.chords.count(e->sval))
                issue("program '" + p.id + "': unknown chord '" + e->sval + "'");
            if (e->tval == ParamType::Rhythm && !s.tables.rhythms.count(e->sval))
                issue("program '" + p.id + "': unknown rhythm '" + e->sval + "'");
        }
        for (const Expr* e : latents)
            if (!s.tables.latents.count(e->ival))
                issue("program '" + p.id + "': unknown latent id " + std::to_string(e->ival));
    }

    // probe values must resolve against the declared tables
    auto probe_it = s.probes.values.find(ParamType::Chord);
    if (probe_it != s.probes.values.end())
        for (const auto& v : probe_it->second)
            if (!s.tables.chords.count(v.name)) issue("probes: unknown chord '" + v.name + "'");
    probe_it = s.probes.values.find(ParamType::Rhythm);
    if (probe_it != s.probes.values.end())
        for (const auto& v : probe_it->second)
            if (!s.tables.rhythms.count(v.name)) issue("probes: unknown rhythm '" + v.name + "'");
    probe_it = s.probes.values.find(ParamType::Latent);
    if (probe_it != s.probes.values.end())
        for (const auto& v : probe_it->second)
            if (!s.tables.latents.count(v.i))
                issue("probes: unknown latent id " + std::to_string(v.i));

    for (const auto& [prog, variants] : s.ops.crossover) {
        if (!known_ids.count(prog))
            issue("crossover: unknown program '" + prog + "'");
        for (const auto& v : variants) {
            const Program* host = s.pool.find(v.with);
            if (!host) {
                issue("crossover: unknown fragment host '" + v.with + "' for '" + prog + "'");
                continue;
            }
            bool slot_ok = false;
            for (const auto& param : host->params)
                if (param.name == v.slot) slot_ok = param.type == ParamType::Pattern;
            if (!slot_ok)
                issue("crossover: host '" + v.with + "' has no pattern parameter '" + v.slot +
                      "'");
        }
    }

    for (const auto& [prog, variants] : s.ops.mutation) {
        if (!known_ids.count(prog)) issue("mutation: unknown program '" + prog + "'");
        for (const auto& v : variants) {
            double total = 0.0;
            for (const auto& o : v.outcomes) {
                if (!s.pool.contains(o.replace))
                    issue("mutation '" + prog + "/" + v.name + "': unknown replacement '" +
                          o.replace + "'");
                if (o.p <= 0.0 || o.p > 1.0)
                    issue("mutation '" + prog + "/" + v.name + "': probability out of (0,1]");
                total += o.p;
            }
            if (std::abs(total - 1.0) > 1e-12)
                issue("mutation '" + prog + "/" + v.name + "': probabilities sum to " +
                      std::to_string(total));
        }
    }

    for (const auto& [pair, name] : s.ops.abstraction_names) {
        if (!known_ids.count(pair.first))
            issue("abstraction: unknown program '" + pair.first + "'");
        if (!known_ids.count(pair.second))
            issue("abstraction: unknown program '" + pair.second + "'");
        (void)name;
    }

    if (s.curator.memory_cap < 1) issue("curator: memory_cap must be >= 1");
    if (s.curator.subset_cap < 0) issue("curator: subset_cap must be >= 0");
    if (s.curator.relevance_threshold < 0.0 || s.curator.relevance_threshold > 1.0)
        issue("curator: relevance_threshold must be in [0,1]");

    std::set<int> task_indices;
    for (const auto& t : s.tasks) {
        const std::string tag = "task " + std::to_string(t.index);
        if (!task_indices.insert(t.index).second) issue(tag + ": duplicate index");
        if (t.target.empty()) issue(tag + ": target melody is empty");
        if (t.action_budget < 1) issue(tag + ": action_budget must be >= 1");
        if (t.beam_width < 1) issue(tag + ": beam_width must be >= 1");
        if (t.tune_budget < 0) issue(tag + ": tune_budget must be >= 0");
        if (t.cycles < 1) issue(tag + ": cycles must be >= 1");
        for (const auto& c : t.candidates)
            if (!s.pool.contains(c)) issue(tag + ": unknown candidate program '" + c + "'");
    }

    return issues;
}

} // namespace repemp
