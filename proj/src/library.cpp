#include "repemp/library.hpp"

#include <algorithm>

namespace repemp {

std::vector<Bindings> ProbeSet::expand(const Program& p, std::size_t cap) const {
    std::size_t total = 1;
    for (const auto& param : p.params) {
        auto it = values.find(param.type);
        if (it == values.end() || it->second.empty())
            throw DslError(DslError::Code::UnknownReference,
                           "no probe values declared for ParamType '" + to_string(param.type) +
                               "' (parameter '" + param.name + "')");
        total *= it->second.size();
        if (total > cap)
            throw DslError(DslError::Code::Domain,
                           "probe expansion exceeds cap of " + std::to_string(cap) + " bindings");
    }
    std::vector<Bindings> out;
    out.reserve(total);
    std::vector<std::size_t> idx(p.params.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        Bindings b;
        for (std::size_t i = 0; i < p.params.size(); ++i)
            b.emplace(p.params[i].name, values.at(p.params[i].type)[idx[i]]);
        out.push_back(std::move(b));
        // odometer, last parameter fastest
        for (std::size_t i = p.params.size(); i-- > 0;) {
            if (++idx[i] < values.at(p.params[i].type).size()) break;
            idx[i] = 0;
        }
    }
    return out;
}

Fingerprint fingerprint(const Program& p, const ProbeSet& probes, const EvalContext& ctx) {
    Fingerprint fp;
    for (const auto& bindings : probes.expand(p)) fp.outputs.push_back(evaluate(p, bindings, ctx));
    return fp;
}

std::string fingerprint_key(const Fingerprint& fp, const MelodyEquivalence& eq) {
    std::string key;
    for (const auto& m : fp.outputs) {
        key += eq.key(m);
        key += ";";
    }
    return key;
}

Library::Library(std::vector<Program> programs) {
    for (auto& p : programs) add(std::move(p));
}

void Library::add(Program p, int provenance) {
    if (contains(p.id)) throw DslError(DslError::Code::Domain, "duplicate id '" + p.id + "'");
    provenance_[p.id] = provenance;
    auto it = std::lower_bound(programs_.begin(), programs_.end(), p,
                               [](const Program& a, const Program& b) { return a.id < b.id; });
    programs_.insert(it, std::move(p));
}

void Library::remove(const std::string& id) {
    auto it = std::find_if(programs_.begin(), programs_.end(),
                           [&](const Program& p) { return p.id == id; });
    if (it == programs_.end())
        throw DslError(DslError::Code::UnknownReference, "unknown program id '" + id + "'");
    programs_.erase(it);
    provenance_.erase(id);
}

const Program* Library::find(const std::string& id) const {
    for (const auto& p : programs_)
        if (p.id == id) return &p;
    return nullptr;
}

std::vector<std::string> Library::ids() const {
    std::vector<std::string> out;
    out.reserve(programs_.size());
    for (const auto& p : programs_) out.push_back(p.id);
    return out;
}

int Library::provenance_of(const std::string& id) const {
    auto it = provenance_.find(id);
    return it == provenance_.end() ? 0 : it->second;
}

std::string Library::canonical_text() const {
    std::string out = "{";
    for (std::size_t i = 0; i < programs_.size(); ++i) {
        if (i) out += "; ";
        out += program_source(programs_[i]);
    }
    out += "}";
    return out;
}

bool operator==(const Library& a, const Library& b) {
    return a.programs_ == b.programs_;
}

std::string library_key(const Library& lib, const ProbeSet& probes, const MelodyEquivalence& eq,
                        const EvalContext& ctx) {
    std::vector<std::string> keys;
    keys.reserve(lib.size());
    for (const auto& p : lib.programs())
        keys.push_back(fingerprint_key(fingerprint(p, probes, ctx), eq));
    std::sort(keys.begin(), keys.end());
    std::string out;
    for (const auto& k : keys) {
        out += k;
        out += "|";
    }
    return out;
}

bool library_equal(const Library& a, const Library& b, const ProbeSet& probes,
                   const MelodyEquivalence& eq, const EvalContext& ctx) {
    if (a.size() != b.size()) return false;
    return library_key(a, probes, eq, ctx) == library_key(b, probes, eq, ctx);
}

nlohmann::ordered_json library_to_json(const Library& lib) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json programs = nlohmann::ordered_json::array();
    for (const auto& p : lib.programs()) programs.push_back(program_to_json(p));
    j["programs"] = std::move(programs);
    nlohmann::ordered_json prov = nlohmann::ordered_json::object();
    for (const auto& p : lib.programs()) prov[p.id] = lib.provenance_of(p.id);
    j["provenance"] = std::move(prov);
    return j;
}

Library library_from_json(const nlohmann::ordered_json& j) {
    Library lib;
    const auto& prov = j.at("provenance");
    for (const auto& pj : j.at("programs")) {
        Program p = program_from_json(pj);
        const int task = prov.contains(p.id) ? prov.at(p.id).get<int>() : 0;
        lib.add(std::move(p), task);
    }
    return lib;
}

} // namespace repemp
