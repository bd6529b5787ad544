#include "repemp/curator.hpp"

#include <algorithm>
#include <set>

namespace repemp {

std::string CuratorAction::label() const {
    auto join = [](const std::vector<std::string>& ids) {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ",";
            out += ids[i];
        }
        return out;
    };
    switch (kind) {
    case Kind::NoOp: return "no-op";
    case Kind::IntegrateSubset: {
        std::string out = "integrate{" + join(integrate) + "}";
        if (!prune.empty()) out += "/prune{" + join(prune) + "}";
        return out;
    }
    case Kind::ComposeThenIntegrate: {
        std::string c;
        if (compose) {
            if (compose->kind == ComposeSpec::Kind::Abstraction)
                c = "abstract(" + compose->a + "," + compose->b + ")";
            else
                c = "crossover(" + compose->a + ",v" + std::to_string(compose->variant) + ")";
        }
        std::string out = "integrate{" + join(integrate) + "}+" + c;
        if (!prune.empty()) out += "/prune{" + join(prune) + "}";
        return out;
    }
    case Kind::PruneSubset: return "prune{" + join(prune) + "}";
    }
    return "?";
}

Library relevance_filter(const Library& candidates, const Episode& episode, double threshold) {
    if (threshold <= 0.0) return candidates;
    Library out;
    if (episode.reward < threshold) return out;
    for (const auto& p : candidates.programs()) {
        auto it = episode.usage.find(p.id);
        if (it != episode.usage.end() && it->second > 0)
            out.add(p, candidates.provenance_of(p.id));
    }
    return out;
}

namespace {

// subsets of ids with size in [min_size, max_size], enumerated smallest-first
// then lexicographically
std::vector<std::vector<std::string>> subsets_up_to(const std::vector<std::string>& ids,
                                                    std::size_t min_size, std::size_t max_size) {
    std::vector<std::vector<std::string>> out;
    const std::size_t n = ids.size();
    max_size = std::min(max_size, n);
    for (std::size_t size = min_size; size <= max_size; ++size) {
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        if (size == 0) {
            out.push_back({});
            continue;
        }
        while (true) {
            std::vector<std::string> subset;
            for (std::size_t i : pick) subset.push_back(ids[i]);
            out.push_back(std::move(subset));
            std::size_t i = size;
            while (i-- > 0) {
                if (pick[i] + (size - i) < n) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
                    break;
                }
                if (i == 0) goto next_size;
            }
        }
    next_size:;
    }
    return out;
}

Library integrate(const CuratorState& state, const std::vector<std::string>& ids) {
    Library lib = state.current;
    for (const auto& id : ids) {
        const Program* p = state.candidates.find(id);
        if (!p) throw OpError("curator: unknown candidate '" + id + "'");
        lib.add(*p, state.task_index);
    }
    return lib;
}

Library apply_compose(const Library& lib, const ComposeSpec& spec, const OpsContext& ctx,
                      int task_index) {
    if (spec.kind == ComposeSpec::Kind::Abstraction) {
        Library out = apply_abstraction(lib, spec.a, spec.b, ctx);
        return out;
    }
    Library out = apply_crossover(lib, spec.a, spec.variant, ctx);
    (void)task_index;
    return out;
}

std::vector<ComposeSpec> compose_options(const Library& lib, const OpsContext& ctx) {
    std::vector<ComposeSpec> out;
    for (const auto& a : lib.programs())
        for (const auto& b : lib.programs())
            if (a.id != b.id && anti_unifiable(a, b))
                out.push_back({ComposeSpec::Kind::Abstraction, a.id, b.id, 0});
    if (ctx.tables)
        for (const auto& p : lib.programs()) {
            auto it = ctx.tables->crossover.find(p.id);
            if (it == ctx.tables->crossover.end()) continue;
            for (std::size_t v = 0; v < it->second.size(); ++v)
                out.push_back({ComposeSpec::Kind::Crossover, p.id, "", static_cast<int>(v)});
        }
    return out;
}

} // namespace

Library apply_curator_action(const CuratorState& state, const CuratorAction& action,
                             const OpsContext& ctx) {
    Library lib = integrate(state, action.integrate);
    if (action.compose) lib = apply_compose(lib, *action.compose, ctx, state.task_index);
    for (const auto& id : action.prune) lib.remove(id);
    return lib;
}

std::vector<CuratorAction> enumerate_actions(const CuratorState& state, const CuratorConfig& cfg,
                                             const OpsContext& ctx) {
    std::vector<CuratorAction> out;
    std::set<std::string> seen;
    auto emit = [&](CuratorAction a) {
        const std::string key = a.label();
        if (seen.insert(key).second) out.push_back(std::move(a));
    };

    emit(CuratorAction{}); // no-op

    const std::size_t cap = static_cast<std::size_t>(cfg.memory_cap);
    const std::size_t subset_cap = static_cast<std::size_t>(cfg.subset_cap);

    // attach minimal prune subsets when lib exceeds the memory cap
    auto with_prunes = [&](CuratorAction base, const Library& lib) {
        if (lib.size() <= cap) {
            emit(std::move(base));
            return;
        }
        const std::size_t excess = lib.size() - cap;
        for (auto& prune : subsets_up_to(lib.ids(), excess, excess)) {
            CuratorAction a = base;
            a.prune = prune;
            emit(std::move(a));
        }
    };

    for (auto& subset : subsets_up_to(state.candidates.ids(), 0, subset_cap)) {
        Library base = integrate(state, subset);

        if (!subset.empty()) {
            CuratorAction a;
            a.kind = CuratorAction::Kind::IntegrateSubset;
            a.integrate = subset;
            with_prunes(std::move(a), base);
        }

        for (const auto& spec : compose_options(base, ctx)) {
            Library composed;
            try {
                composed = apply_compose(base, spec, ctx, state.task_index);
            } catch (const OpError&) {
                continue;
            }
            CuratorAction a;
            a.kind = CuratorAction::Kind::ComposeThenIntegrate;
            a.integrate = subset;
            a.compose = spec;
            with_prunes(std::move(a), composed);
        }
    }

    for (auto& prune : subsets_up_to(state.current.ids(), 1, subset_cap)) {
        if (prune.size() == state.current.size()) continue; // keep at least one program
        CuratorAction a;
        a.kind = CuratorAction::Kind::PruneSubset;
        a.prune = prune;
        emit(std::move(a));
    }

    if (out.size() > 10000)
        throw EnumerationCapError(static_cast<long long>(out.size()), 10000);
    return out;
}

std::vector<ActionEvaluation> evaluate_actions(const CuratorState& state, const Scenario& s,
                                               Estimator estimator) {
    const OpsContext ctx = s.ops_context();
    std::vector<ActionEvaluation> evals;
    for (auto& action : enumerate_actions(state, s.curator, ctx)) {
        Library lib;
        try {
            lib = apply_curator_action(state, action, ctx);
        } catch (const OpError&) {
            continue; // inapplicable under this state
        }
        if (lib.size() > static_cast<std::size_t>(s.curator.memory_cap)) continue;
        EmpowermentReport report;
        try {
            report = rep_emp(lib, ctx, s.channel_options(), estimator);
        } catch (const EnumerationCapError& e) {
            throw EnumerationCapError(e.required, s.enumeration_cap,
                                      "while evaluating action " + action.label());
        }
        evals.push_back({std::move(action), std::move(lib), std::move(report)});
    }
    return evals;
}

const ActionEvaluation& choose_action(const std::vector<ActionEvaluation>& evals) {
    if (evals.empty()) throw OpError("curator: no applicable actions");
    const ActionEvaluation* best = &evals[0];
    for (const auto& e : evals) {
        if (e.report.mi_bits > best->report.mi_bits) {
            best = &e;
            continue;
        }
        if (e.report.mi_bits < best->report.mi_bits) continue;
        if (e.library.size() != best->library.size()) {
            if (e.library.size() < best->library.size()) best = &e;
            continue;
        }
        if (e.library.canonical_text() < best->library.canonical_text()) best = &e;
    }
    return *best;
}

CurateResult curate_step(const CuratorState& state, const Scenario& s, Estimator estimator) {
    const auto evals = evaluate_actions(state, s, estimator);
    const ActionEvaluation& best = choose_action(evals);
    return {best.library, best.report, best.action};
}

} // namespace repemp
