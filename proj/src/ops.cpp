#include "repemp/ops.hpp"

#include <algorithm>
#include <map>

namespace repemp {

std::string to_string(OpKind k) {
    switch (k) {
    case OpKind::Selection: return "selection";
    case OpKind::Crossover: return "crossover";
    case OpKind::Abstraction: return "abstraction";
    case OpKind::Mutation: return "mutation";
    case OpKind::Joint: return "joint";
    }
    return "?";
}

Library apply_selection(const Library& z, const std::vector<std::string>& keep) {
    for (const auto& id : keep)
        if (!z.contains(id)) throw OpError("selection: unknown id '" + id + "'");
    Library out;
    for (const auto& p : z.programs())
        if (std::find(keep.begin(), keep.end(), p.id) != keep.end())
            out.add(p, z.provenance_of(p.id));
    return out;
}

namespace {

ExprPtr substitute_param(const ExprPtr& e, const std::string& param, const ExprPtr& replacement) {
    if (e->kind == Expr::Kind::ParamRef && e->sval == param) return replacement;
    if (e->args.empty()) return e;
    Expr copy = *e;
    copy.args.clear();
    for (const auto& a : e->args) copy.args.push_back(substitute_param(a, param, replacement));
    return std::make_shared<Expr>(std::move(copy));
}

} // namespace

Program crossover_program(const Program& a, const CrossoverVariant& variant,
                          const OpsContext& ctx) {
    const Program* host = ctx.pool ? ctx.pool->find(variant.with) : nullptr;
    if (!host) throw OpError("crossover: unknown fragment host '" + variant.with + "'");
    const Param* slot = nullptr;
    for (const auto& p : host->params)
        if (p.name == variant.slot) slot = &p;
    if (!slot)
        throw OpError("crossover: host '" + variant.with + "' has no parameter '" + variant.slot +
                      "'");
    if (slot->type != ParamType::Pattern)
        throw OpError("crossover: ParamType mismatch at splice point '" + variant.slot +
                      "' (expected pattern, got " + to_string(slot->type) + ")");

    Program out;
    out.id = variant.name;
    out.params = a.params;
    for (const auto& p : host->params) {
        if (p.name == variant.slot) continue;
        for (const auto& q : out.params)
            if (q.name == p.name)
                throw OpError("crossover: parameter name clash '" + p.name + "'");
        out.params.push_back(p);
    }
    out.body = substitute_param(host->body, variant.slot, a.body);
    return out;
}

Library apply_crossover(const Library& z, const std::string& a, int variant,
                        const OpsContext& ctx) {
    const Program* prog = z.find(a);
    if (!prog) throw OpError("crossover: unknown id '" + a + "'");
    auto it = ctx.tables->crossover.find(a);
    if (it == ctx.tables->crossover.end() || variant < 0 ||
        static_cast<std::size_t>(variant) >= it->second.size())
        throw OpError("crossover: variant " + std::to_string(variant) + " not declared for '" + a +
                      "'");
    Program spliced = crossover_program(*prog, it->second[static_cast<std::size_t>(variant)], ctx);
    if (z.contains(spliced.id))
        throw OpError("crossover: result id '" + spliced.id + "' already present");
    Library out = z;
    out.add(std::move(spliced), z.provenance_of(a));
    return out;
}

namespace {

struct DiffSite {
    const Expr* a = nullptr;
    const Expr* b = nullptr;
    int count = 0;
    bool structural_mismatch = false;
};

bool is_literal_leaf(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::PitchLit:
    case Expr::Kind::IntLit:
    case Expr::Kind::DirLit:
    case Expr::Kind::NameLit:
    case Expr::Kind::MelodyLit:
        return true;
    default:
        return false;
    }
}

void diff_trees(const Expr& a, const Expr& b, DiffSite& site) {
    if (site.structural_mismatch) return;
    const bool same_shape = a.kind == b.kind && a.sval == b.sval && a.args.size() == b.args.size();
    if (a.args.empty() && b.args.empty()) {
        if (a.equals(b)) return;
        if (is_literal_leaf(a) && is_literal_leaf(b) && a.kind == b.kind && a.tval == b.tval) {
            site.count++;
            site.a = &a;
            site.b = &b;
            return;
        }
        site.structural_mismatch = true;
        return;
    }
    if (!same_shape) {
        site.structural_mismatch = true;
        return;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i) diff_trees(*a.args[i], *b.args[i], site);
}

ParamType leaf_param_type(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::PitchLit: return ParamType::Pitch;
    case Expr::Kind::IntLit: return e.tval;
    case Expr::Kind::DirLit: return ParamType::Direction;
    case Expr::Kind::NameLit: return e.tval;
    case Expr::Kind::MelodyLit: return ParamType::Pattern;
    default: return ParamType::Count;
    }
}

ExprPtr replace_leaf(const ExprPtr& e, const Expr* target, const ExprPtr& replacement) {
    if (e.get() == target) return replacement;
    if (e->args.empty()) return e;
    Expr copy = *e;
    copy.args.clear();
    for (const auto& a : e->args) copy.args.push_back(replace_leaf(a, target, replacement));
    return std::make_shared<Expr>(std::move(copy));
}

} // namespace

bool anti_unifiable(const Program& a, const Program& b) {
    if (a.params != b.params) return false;
    DiffSite site;
    diff_trees(*a.body, *b.body, site);
    return !site.structural_mismatch && site.count == 1;
}

Library apply_abstraction(const Library& z, const std::string& a, const std::string& b,
                          const OpsContext& ctx) {
    const Program* pa = z.find(a);
    const Program* pb = z.find(b);
    if (!pa || !pb) throw OpError("abstraction: unknown id '" + (pa ? b : a) + "'");
    if (pa->params != pb->params)
        throw OpError("abstraction: '" + a + "' and '" + b +
                      "' are not anti-unifiable (different parameters)");

    DiffSite site;
    diff_trees(*pa->body, *pb->body, site);
    if (site.structural_mismatch)
        throw OpError("abstraction: '" + a + "' and '" + b + "' are not anti-unifiable");
    if (site.count == 0)
        throw OpError("abstraction: zero differing slots between '" + a + "' and '" + b + "'");
    if (site.count > 1)
        throw OpError("abstraction: " + std::to_string(site.count) + " differing slots between '" +
                      a + "' and '" + b + "'");

    const ParamType new_type = leaf_param_type(*site.a);
    std::string new_name = to_string(new_type);
    for (int suffix = 2;; ++suffix) {
        bool clash = false;
        for (const auto& p : pa->params) clash = clash || p.name == new_name;
        if (!clash) break;
        new_name = to_string(new_type) + std::to_string(suffix);
    }

    Program gen;
    gen.id = "abs_" + a + "_" + b;
    if (ctx.tables) {
        auto named = ctx.tables->abstraction_names.find({a, b});
        if (named != ctx.tables->abstraction_names.end()) gen.id = named->second;
    }

    Expr ref;
    ref.kind = Expr::Kind::ParamRef;
    ref.sval = new_name;
    ref.tval = new_type;
    gen.params.push_back({new_name, new_type});
    for (const auto& p : pa->params) gen.params.push_back(p);
    gen.body = replace_leaf(pa->body, site.a, std::make_shared<Expr>(std::move(ref)));

    if (z.contains(gen.id))
        throw OpError("abstraction: result id '" + gen.id + "' already present");
    Library out = z;
    out.add(std::move(gen), std::max(z.provenance_of(a), z.provenance_of(b)));
    return out;
}

OutcomeDistribution apply_mutation(const Library& z, const std::string& p, int variant,
                                   const OpsContext& ctx) {
    const Program* prog = z.find(p);
    if (!prog) throw OpError("mutation: unknown id '" + p + "'");
    auto it = ctx.tables->mutation.find(p);
    if (it == ctx.tables->mutation.end() || variant < 0 ||
        static_cast<std::size_t>(variant) >= it->second.size())
        throw OpError("mutation: unknown variant " + std::to_string(variant) + " for '" + p + "'");

    std::vector<std::pair<Library, double>> entries;
    for (const auto& outcome : it->second[static_cast<std::size_t>(variant)].outcomes) {
        const Program* repl = ctx.pool ? ctx.pool->find(outcome.replace) : nullptr;
        if (!repl) throw OpError("mutation: unknown replacement '" + outcome.replace + "'");
        Library next = z;
        const int prov = next.provenance_of(p);
        next.remove(p);
        if (next.contains(repl->id))
            throw OpError("mutation: replacement id '" + repl->id + "' already present");
        next.add(*repl, prov);
        entries.emplace_back(std::move(next), outcome.p);
    }
    return merge_outcomes(std::move(entries), ctx);
}

std::vector<std::vector<JointChoice>> joint_choices(const Library& z, const OpsContext& ctx) {
    std::vector<std::vector<JointChoice>> out;
    for (const auto& p : z.programs()) {
        std::vector<JointChoice> choices;
        if (ctx.tables) {
            auto cit = ctx.tables->crossover.find(p.id);
            if (cit != ctx.tables->crossover.end()) {
                for (const auto& var : cit->second) {
                    JointChoice c;
                    c.label = var.with;
                    c.outcomes.push_back({crossover_program(p, var, ctx), 1.0});
                    choices.push_back(std::move(c));
                }
            }
            auto mit = ctx.tables->mutation.find(p.id);
            if (mit != ctx.tables->mutation.end()) {
                for (const auto& var : mit->second) {
                    JointChoice c;
                    c.label = var.name;
                    for (const auto& outcome : var.outcomes) {
                        const Program* repl = ctx.pool ? ctx.pool->find(outcome.replace) : nullptr;
                        if (!repl)
                            throw OpError("mutation: unknown replacement '" + outcome.replace +
                                          "'");
                        c.outcomes.push_back({*repl, outcome.p});
                    }
                    choices.push_back(std::move(c));
                }
            }
        }
        if (choices.empty()) {
            JointChoice keep;
            keep.label = "keep";
            keep.outcomes.push_back({p, 1.0});
            choices.push_back(std::move(keep));
        }
        out.push_back(std::move(choices));
    }
    return out;
}

long long joint_variant_count(const Library& z, const OpsContext& ctx) {
    __int128 total = 1;
    for (const auto& choices : joint_choices(z, ctx)) {
        total *= static_cast<__int128>(choices.size());
        if (total > (__int128)1 << 62)
            throw OpError("joint: variant count overflows the enumeration range");
    }
    return static_cast<long long>(total);
}

namespace {

std::vector<std::size_t> decode_joint(long long variant,
                                      const std::vector<std::vector<JointChoice>>& choices) {
    std::vector<std::size_t> digits(choices.size(), 0);
    long long v = variant;
    for (std::size_t i = choices.size(); i-- > 0;) {
        const long long radix = static_cast<long long>(choices[i].size());
        digits[i] = static_cast<std::size_t>(v % radix);
        v /= radix;
    }
    if (v != 0) throw OpError("joint: variant index out of range");
    return digits;
}

OutcomeDistribution apply_joint(const Library& z, const Operation& op, const OpsContext& ctx) {
    if (op.targets != z.ids())
        throw OpError("joint: operation targets do not match the current library");
    const auto choices = joint_choices(z, ctx);
    const auto digits = decode_joint(op.variant, choices);

    // product over per-program outcome distributions
    std::vector<std::pair<std::vector<const Program*>, double>> partial{{{}, 1.0}};
    for (std::size_t i = 0; i < choices.size(); ++i) {
        const JointChoice& choice = choices[i][digits[i]];
        std::vector<std::pair<std::vector<const Program*>, double>> next;
        for (const auto& [progs, prob] : partial) {
            for (const auto& outcome : choice.outcomes) {
                auto extended = progs;
                extended.push_back(&outcome.program);
                next.emplace_back(std::move(extended), prob * outcome.p);
            }
        }
        partial = std::move(next);
    }

    const auto original_ids = z.ids();
    std::vector<std::pair<Library, double>> entries;
    for (const auto& [progs, prob] : partial) {
        Library lib;
        for (std::size_t i = 0; i < progs.size(); ++i) {
            if (lib.contains(progs[i]->id))
                throw OpError("joint: duplicate program id '" + progs[i]->id + "' in outcome");
            lib.add(*progs[i], z.provenance_of(original_ids[i]));
        }
        entries.emplace_back(std::move(lib), prob);
    }
    return merge_outcomes(std::move(entries), ctx);
}

} // namespace

OutcomeDistribution apply_operation(const Library& z, const Operation& op, const OpsContext& ctx) {
    switch (op.kind) {
    case OpKind::Selection: {
        OutcomeDistribution d;
        d.support.emplace_back(apply_selection(z, op.targets), 1.0);
        return d;
    }
    case OpKind::Crossover: {
        if (op.targets.empty()) throw OpError("crossover: missing target");
        OutcomeDistribution d;
        d.support.emplace_back(
            apply_crossover(z, op.targets[0], static_cast<int>(op.variant), ctx), 1.0);
        return d;
    }
    case OpKind::Abstraction: {
        if (op.targets.size() != 2) throw OpError("abstraction: needs two targets");
        OutcomeDistribution d;
        d.support.emplace_back(apply_abstraction(z, op.targets[0], op.targets[1], ctx), 1.0);
        return d;
    }
    case OpKind::Mutation:
        if (op.targets.empty()) throw OpError("mutation: missing target");
        return apply_mutation(z, op.targets[0], static_cast<int>(op.variant), ctx);
    case OpKind::Joint:
        return apply_joint(z, op, ctx);
    }
    throw OpError("unknown operation kind");
}

std::string operation_label(const Library& z, const Operation& op, const OpsContext& ctx) {
    switch (op.kind) {
    case OpKind::Selection: {
        std::string out = "select{";
        for (std::size_t i = 0; i < op.targets.size(); ++i) {
            if (i) out += ",";
            out += op.targets[i];
        }
        return out + "}";
    }
    case OpKind::Crossover: {
        std::string name = "v" + std::to_string(op.variant);
        if (ctx.tables) {
            auto it = ctx.tables->crossover.find(op.targets.at(0));
            if (it != ctx.tables->crossover.end() &&
                static_cast<std::size_t>(op.variant) < it->second.size())
                name = it->second[static_cast<std::size_t>(op.variant)].with;
        }
        return "crossover(" + op.targets.at(0) + "," + name + ")";
    }
    case OpKind::Abstraction:
        return "abstract(" + op.targets.at(0) + "," + op.targets.at(1) + ")";
    case OpKind::Mutation: {
        std::string name = "v" + std::to_string(op.variant);
        if (ctx.tables) {
            auto it = ctx.tables->mutation.find(op.targets.at(0));
            if (it != ctx.tables->mutation.end() &&
                static_cast<std::size_t>(op.variant) < it->second.size())
                name = it->second[static_cast<std::size_t>(op.variant)].name;
        }
        return "mutate(" + op.targets.at(0) + "," + name + ")";
    }
    case OpKind::Joint: {
        const auto choices = joint_choices(z, ctx);
        const auto digits = decode_joint(op.variant, choices);
        const auto ids = z.ids();
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ",";
            out += ids[i] + ">" + choices[i][digits[i]].label;
        }
        return out;
    }
    }
    return "?";
}

OutcomeDistribution merge_outcomes(std::vector<std::pair<Library, double>> entries,
                                   const OpsContext& ctx) {
    const EvalContext eval = ctx.eval();
    struct Bucket {
        Library rep;
        std::string rep_text;
        double p = 0.0;
    };
    std::map<std::string, Bucket> buckets;
    for (auto& [lib, p] : entries) {
        std::string key = ctx.probes ? library_key(lib, *ctx.probes, ctx.equivalence, eval)
                                     : lib.canonical_text();
        auto it = buckets.find(key);
        if (it == buckets.end()) {
            Bucket b;
            b.rep_text = lib.canonical_text();
            b.rep = std::move(lib);
            b.p = p;
            buckets.emplace(std::move(key), std::move(b));
        } else {
            it->second.p += p;
            std::string text = lib.canonical_text();
            if (text < it->second.rep_text) {
                it->second.rep = std::move(lib);
                it->second.rep_text = std::move(text);
            }
        }
    }
    std::vector<Bucket> sorted;
    sorted.reserve(buckets.size());
    for (auto& [key, b] : buckets) sorted.push_back(std::move(b));
    std::sort(sorted.begin(), sorted.end(),
              [](const Bucket& a, const Bucket& b) { return a.rep_text < b.rep_text; });
    OutcomeDistribution out;
    for (auto& b : sorted) out.support.emplace_back(std::move(b.rep), b.p);
    return out;
}

OutcomeDistribution outcome_distribution(const Library& z, const OperationSequence& seq,
                                         const OpsContext& ctx) {
    std::vector<std::pair<Library, double>> current{{z, 1.0}};
    for (std::size_t step = 0; step < seq.size(); ++step) {
        std::vector<std::pair<Library, double>> next;
        for (const auto& [lib, prob] : current) {
            OutcomeDistribution d;
            try {
                d = apply_operation(lib, seq[step], ctx);
            } catch (const OpError& e) {
                throw OpError("inapplicable operation at step " + std::to_string(step) + ": " +
                              e.what());
            }
            for (auto& [outcome, p] : d.support) next.emplace_back(std::move(outcome), prob * p);
        }
        current = merge_outcomes(std::move(next), ctx).support;
    }
    OutcomeDistribution out;
    out.support = std::move(current);
    return out;
}

} // namespace repemp
