#include "repemp/executor.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace repemp {

std::string ExecutorAction::label() const {
    if (kind == Kind::AddNote) {
        std::string out = "add_note(" + pitch_name(note.pitch);
        if (note.duration != Rational{1}) out += ":" + note.duration.str();
        return out + ")";
    }
    std::string out = "invoke(" + program;
    for (const auto& [name, value] : bindings) out += ", " + name + "=" + value.str();
    return out + ")";
}

double reward(const Melody& m, const Melody& target) {
    const std::size_t n = m.size();
    const std::size_t t = target.size();
    if (n == 0 && t == 0) return 1.0;
    // Levenshtein over (pitch, duration) tokens
    std::vector<std::size_t> prev(t + 1), cur(t + 1);
    for (std::size_t j = 0; j <= t; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t; ++j) {
            const bool eq = m.notes[i - 1] == target.notes[j - 1];
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (eq ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    const double dist = static_cast<double>(prev[t]);
    return 1.0 - dist / static_cast<double>(std::max(n, t));
}

namespace {

std::vector<Note> distinct_target_notes(const Melody& target) {
    std::vector<Note> notes = target.notes;
    std::sort(notes.begin(), notes.end(), [](const Note& a, const Note& b) {
        if (a.pitch != b.pitch) return a.pitch < b.pitch;
        return a.duration < b.duration;
    });
    notes.erase(std::unique(notes.begin(), notes.end()), notes.end());
    return notes;
}

std::vector<Value> domain_for(ParamType type, const TaskSpec& task,
                              const ExecutorDomains& domains, const ScenarioTables& tables) {
    std::vector<Value> out;
    switch (type) {
    case ParamType::Pitch: {
        std::set<int> pitches;
        for (const auto& n : task.target.notes) pitches.insert(n.pitch);
        for (int p : pitches) out.push_back(Value::pitch(p));
        break;
    }
    case ParamType::Count: {
        if (!domains.counts.empty()) {
            for (int c : domains.counts) out.push_back(Value::count(c));
        } else {
            const int hi = std::min<int>(static_cast<int>(task.target.size()), 6);
            for (int c = 2; c <= hi; ++c) out.push_back(Value::count(c));
        }
        break;
    }
    case ParamType::Steps: {
        if (!domains.steps.empty()) {
            for (int s : domains.steps) out.push_back(Value::steps(s));
        } else {
            std::set<int> steps;
            for (std::size_t i = 1; i < task.target.size(); ++i) {
                const int d = std::abs(task.target.notes[i].pitch -
                                       task.target.notes[i - 1].pitch);
                if (d) steps.insert(d);
            }
            if (steps.empty()) steps.insert(1);
            for (int s : steps) out.push_back(Value::steps(s));
        }
        break;
    }
    case ParamType::Direction: {
        if (!domains.directions.empty())
            for (Direction d : domains.directions) out.push_back(Value::direction(d));
        else {
            out.push_back(Value::direction(Direction::Up));
            out.push_back(Value::direction(Direction::Down));
        }
        break;
    }
    case ParamType::Chord:
        for (const auto& [name, offsets] : tables.chords) {
            (void)offsets;
            out.push_back(Value::chord(name));
        }
        break;
    case ParamType::Pattern: {
        for (const auto& n : distinct_target_notes(task.target))
            out.push_back(Value::pattern(Melody{{n}}));
        for (const auto& m : domains.extra_patterns) out.push_back(Value::pattern(m));
        break;
    }
    case ParamType::Rhythm:
        for (const auto& [name, durs] : tables.rhythms) {
            (void)durs;
            out.push_back(Value::rhythm(name));
        }
        break;
    case ParamType::Latent:
        for (const auto& [id, m] : tables.latents) {
            (void)m;
            out.push_back(Value::latent(id));
        }
        break;
    }
    return out;
}

} // namespace

std::vector<ExecutorAction> action_alphabet(const Library& z, const TaskSpec& task,
                                            const ExecutorDomains& domains,
                                            const ScenarioTables& tables) {
    std::vector<ExecutorAction> out;
    for (const auto& n : distinct_target_notes(task.target)) {
        ExecutorAction a;
        a.kind = ExecutorAction::Kind::AddNote;
        a.note = n;
        out.push_back(std::move(a));
    }
    for (const auto& p : z.programs()) {
        std::vector<std::vector<Value>> per_param;
        bool feasible = true;
        for (const auto& param : p.params) {
            auto dom = domain_for(param.type, task, domains, tables);
            if (dom.empty()) { feasible = false; break; }
            per_param.push_back(std::move(dom));
        }
        if (!feasible) continue;
        std::size_t total = 1;
        for (const auto& dom : per_param) total *= dom.size();
        if (total > 512)
            throw ScenarioError("executor: binding domain for '" + p.id +
                                "' exceeds 512 combinations");
        std::vector<std::size_t> idx(per_param.size(), 0);
        for (std::size_t k = 0; k < total; ++k) {
            ExecutorAction a;
            a.kind = ExecutorAction::Kind::Invoke;
            a.program = p.id;
            for (std::size_t i = 0; i < per_param.size(); ++i)
                a.bindings.emplace(p.params[i].name, per_param[i][idx[i]]);
            out.push_back(std::move(a));
            for (std::size_t i = per_param.size(); i-- > 0;) {
                if (++idx[i] < per_param[i].size()) break;
                idx[i] = 0;
            }
        }
    }
    if (out.size() > 4096) throw ScenarioError("executor: action alphabet exceeds 4096 entries");
    return out;
}

namespace {

struct BeamState {
    Melody melody;
    std::vector<std::size_t> actions; // indices into the alphabet
    double score = 0.0;
};

// (higher score, then earlier action sequence) wins
bool beam_better(const BeamState& a, const BeamState& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.actions < b.actions;
}

// best-episode order: higher score, then fewer actions, then earlier sequence
bool episode_better(const BeamState& a, const BeamState& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.actions.size() != b.actions.size()) return a.actions.size() < b.actions.size();
    return a.actions < b.actions;
}

std::string melody_token_key(const Melody& m) {
    std::string key;
    for (const auto& n : m.notes) {
        key += std::to_string(n.pitch);
        key += "@";
        key += n.duration.str();
        key += ",";
    }
    return key;
}

} // namespace

Episode solve(const Library& z, const TaskSpec& task, const Scenario& s) {
    const std::vector<ExecutorAction> alphabet =
        action_alphabet(z, task, s.executor, s.tables);
    const EvalContext eval{&s.pool, &s.tables, s.eval_budget};

    // pre-evaluate invoke outputs; invalid bindings (range errors, budget)
    // disable the action
    std::vector<Melody> outputs(alphabet.size());
    std::vector<bool> enabled(alphabet.size(), true);
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        const ExecutorAction& a = alphabet[i];
        if (a.kind == ExecutorAction::Kind::AddNote) {
            outputs[i] = Melody{{a.note}};
            continue;
        }
        const Program* p = z.find(a.program);
        try {
            outputs[i] = evaluate(*p, a.bindings, eval);
        } catch (const DslError&) {
            enabled[i] = false;
        }
        if (outputs[i].empty()) enabled[i] = false; // no-op actions never help
    }

    const std::size_t max_len = task.target.size() * 2 + 2;

    BeamState start;
    start.score = reward(start.melody, task.target);
    BeamState best = start;
    std::vector<BeamState> beam{start};

    for (int depth = 0; depth < task.action_budget && best.score < 1.0 && !beam.empty();
         ++depth) {
        std::map<std::string, BeamState> dedup;
        for (const auto& state : beam) {
            for (std::size_t i = 0; i < alphabet.size(); ++i) {
                if (!enabled[i]) continue;
                if (state.melody.size() + outputs[i].size() > max_len) continue;
                BeamState next;
                next.melody = state.melody;
                next.melody.append(outputs[i]);
                next.actions = state.actions;
                next.actions.push_back(i);
                next.score = reward(next.melody, task.target);
                const std::string key = melody_token_key(next.melody);
                auto it = dedup.find(key);
                if (it == dedup.end() || episode_better(next, it->second))
                    dedup.insert_or_assign(key, std::move(next));
            }
        }
        std::vector<BeamState> expanded;
        expanded.reserve(dedup.size());
        for (auto& [key, state] : dedup) expanded.push_back(std::move(state));
        std::sort(expanded.begin(), expanded.end(), beam_better);
        if (expanded.size() > static_cast<std::size_t>(task.beam_width))
            expanded.resize(static_cast<std::size_t>(task.beam_width));
        for (const auto& state : expanded)
            if (episode_better(state, best)) best = state;
        beam = std::move(expanded);
    }

    Episode ep;
    for (std::size_t i : best.actions) {
        ep.actions.push_back(alphabet[i]);
        if (alphabet[i].kind == ExecutorAction::Kind::Invoke)
            ep.usage[alphabet[i].program] += 1;
    }
    ep.produced = best.melody;
    ep.reward = best.score;
    return ep;
}

namespace {

// Deterministic one-step successors: declared crossovers, point-mass
// mutations, applicable abstractions.
std::vector<Library> deterministic_successors(const Library& lib, const OpsContext& ctx) {
    std::vector<Library> out;
    for (const auto& p : lib.programs()) {
        auto cit = ctx.tables->crossover.find(p.id);
        if (cit != ctx.tables->crossover.end())
            for (std::size_t v = 0; v < cit->second.size(); ++v) {
                try {
                    out.push_back(apply_crossover(lib, p.id, static_cast<int>(v), ctx));
                } catch (const OpError&) {
                }
            }
        auto mit = ctx.tables->mutation.find(p.id);
        if (mit != ctx.tables->mutation.end())
            for (std::size_t v = 0; v < mit->second.size(); ++v) {
                if (mit->second[v].outcomes.size() != 1) continue; // stochastic: excluded
                try {
                    OutcomeDistribution d = apply_mutation(lib, p.id, static_cast<int>(v), ctx);
                    if (d.support.size() == 1) out.push_back(d.support[0].first);
                } catch (const OpError&) {
                }
            }
    }
    for (const auto& a : lib.programs())
        for (const auto& b : lib.programs())
            if (a.id != b.id && anti_unifiable(a, b)) {
                try {
                    out.push_back(apply_abstraction(lib, a.id, b.id, ctx));
                } catch (const OpError&) {
                }
            }
    return out;
}

struct TuneResult {
    Library lib;
    int depth = 0;
};

TuneResult tune_impl(const Library& z, const TaskSpec& task, int t_prime, const Scenario& s,
                     const std::map<std::string, int>* usage_prior) {
    if (t_prime <= 0) return {z, 0};
    const OpsContext ctx = s.ops_context();

    struct Candidate {
        Library lib;
        int depth;
    };
    std::vector<Candidate> all{{z, 0}};
    std::set<std::string> seen{z.canonical_text()};
    std::size_t frontier_begin = 0;
    for (int depth = 1; depth <= t_prime; ++depth) {
        const std::size_t frontier_end = all.size();
        for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
            for (auto& next : deterministic_successors(all[i].lib, ctx)) {
                if (all.size() >= 512)
                    throw EnumerationCapError(static_cast<long long>(all.size()) + 1, 512);
                if (seen.insert(next.canonical_text()).second)
                    all.push_back({std::move(next), depth});
            }
        }
        frontier_begin = frontier_end;
    }

    auto retention = [&](const Library& lib) {
        if (!usage_prior) return 0;
        int total = 0;
        for (const auto& [id, count] : *usage_prior)
            if (lib.contains(id)) total += count;
        return total;
    };

    struct Scored {
        double reward;
        std::size_t actions;
        int retained;
        int depth;
        std::string text;
        std::size_t index;
    };
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const Episode ep = solve(all[i].lib, task, s);
        scored.push_back({ep.reward, ep.actions.size(), retention(all[i].lib), all[i].depth,
                          all[i].lib.canonical_text(), i});
    }
    const Scored* best = &scored[0];
    for (const auto& c : scored) {
        auto better = [&](const Scored& a, const Scored& b) {
            if (a.reward != b.reward) return a.reward > b.reward;
            if (a.actions != b.actions) return a.actions < b.actions;
            if (a.retained != b.retained) return a.retained > b.retained;
            if (a.depth != b.depth) return a.depth < b.depth; // incumbent first
            return a.text < b.text;
        };
        if (better(c, *best)) best = &c;
    }
    return {all[best->index].lib, all[best->index].depth};
}

} // namespace

Library tune(const Library& z, const TaskSpec& task, int t_prime, const Scenario& s,
             const std::map<std::string, int>* usage_prior) {
    return tune_impl(z, task, t_prime, s, usage_prior).lib;
}

std::pair<Library, Episode> use_improve(const Library& z, const TaskSpec& task,
                                        const Scenario& s) {
    Library lib = z;
    Library best_lib = z;
    Episode best;
    bool have_best = false;
    int max_tune_depth = 0;
    std::vector<double> cycle_rewards;

    for (int cycle = 0; cycle < task.cycles; ++cycle) {
        Episode ep = solve(lib, task, s);
        if (!have_best || ep.reward > best.reward ||
            (ep.reward == best.reward && ep.actions.size() < best.actions.size())) {
            best = ep;
            best_lib = lib;
            have_best = true;
        }
        cycle_rewards.push_back(best.reward);
        if (best.reward >= 1.0) break;
        if (cycle + 1 < task.cycles) {
            TuneResult tuned = tune_impl(lib, task, task.tune_budget, s, &ep.usage);
            max_tune_depth = std::max(max_tune_depth, tuned.depth);
            lib = std::move(tuned.lib);
        }
    }
    best.cycle_rewards = std::move(cycle_rewards);
    best.tuning_ops_used = max_tune_depth;
    return {best_lib, best};
}

} // namespace repemp
