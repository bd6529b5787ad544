#include "repemp/dsl.hpp"

namespace repemp {

using nlohmann::ordered_json;

ordered_json melody_to_json(const Melody& m) {
    ordered_json out = ordered_json::array();
    for (const auto& n : m.notes) out.push_back({n.pitch, n.duration.str()});
    return out;
}

namespace {

Rational rational_from_str(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

} // namespace

Melody melody_from_json(const ordered_json& j) {
    Melody m;
    for (const auto& entry : j) {
        Note n{entry.at(0).get<int>(), rational_from_str(entry.at(1).get<std::string>())};
        check_note(n);
        m.notes.push_back(n);
    }
    return m;
}

namespace {

ordered_json expr_to_json(const Expr& e) {
    ordered_json j;
    switch (e.kind) {
    case Expr::Kind::PitchLit:
        j["k"] = "pitch";
        j["v"] = e.ival;
        break;
    case Expr::Kind::IntLit:
        j["k"] = "int";
        j["t"] = to_string(e.tval);
        j["v"] = e.ival;
        break;
    case Expr::Kind::RatLit:
        j["k"] = "rat";
        j["v"] = e.rval.str();
        break;
    case Expr::Kind::DirLit:
        j["k"] = "dir";
        j["v"] = to_string(e.dval);
        break;
    case Expr::Kind::NameLit:
        j["k"] = "name";
        j["t"] = to_string(e.tval);
        j["v"] = e.sval;
        break;
    case Expr::Kind::MelodyLit:
        j["k"] = "melody";
        j["v"] = melody_to_json(e.mval);
        break;
    case Expr::Kind::ParamRef:
        j["k"] = "param";
        j["t"] = to_string(e.tval);
        j["v"] = e.sval;
        break;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
        j["k"] = e.kind == Expr::Kind::Add ? "add" : "sub";
        break;
    case Expr::Kind::Call:
        j["k"] = "call";
        j["f"] = e.sval;
        break;
    }
    if (!e.args.empty()) {
        ordered_json args = ordered_json::array();
        for (const auto& a : e.args) args.push_back(expr_to_json(*a));
        j["a"] = std::move(args);
    }
    return j;
}

ExprPtr expr_from_json(const ordered_json& j) {
    Expr e;
    const std::string k = j.at("k").get<std::string>();
    if (k == "pitch") {
        e.kind = Expr::Kind::PitchLit;
        e.ival = j.at("v").get<int>();
    } else if (k == "int") {
        e.kind = Expr::Kind::IntLit;
        e.tval = *param_type_from(j.at("t").get<std::string>());
        e.ival = j.at("v").get<int>();
    } else if (k == "rat") {
        e.kind = Expr::Kind::RatLit;
        e.rval = rational_from_str(j.at("v").get<std::string>());
    } else if (k == "dir") {
        e.kind = Expr::Kind::DirLit;
        e.dval = j.at("v").get<std::string>() == "up" ? Direction::Up : Direction::Down;
    } else if (k == "name") {
        e.kind = Expr::Kind::NameLit;
        e.tval = *param_type_from(j.at("t").get<std::string>());
        e.sval = j.at("v").get<std::string>();
    } else if (k == "melody") {
        e.kind = Expr::Kind::MelodyLit;
        e.mval = melody_from_json(j.at("v"));
    } else if (k == "param") {
        e.kind = Expr::Kind::ParamRef;
        e.tval = *param_type_from(j.at("t").get<std::string>());
        e.sval = j.at("v").get<std::string>();
    } else if (k == "add") {
        e.kind = Expr::Kind::Add;
    } else if (k == "sub") {
        e.kind = Expr::Kind::Sub;
    } else if (k == "call") {
        e.kind = Expr::Kind::Call;
        e.sval = j.at("f").get<std::string>();
    } else {
        throw DslError(DslError::Code::Domain, "unknown expression tag '" + k + "'");
    }
    if (j.contains("a"))
        for (const auto& a : j.at("a")) e.args.push_back(expr_from_json(a));
    return std::make_shared<Expr>(std::move(e));
}

} // namespace

ordered_json program_to_json(const Program& p) {
    ordered_json j;
    j["id"] = p.id;
    ordered_json params = ordered_json::array();
    for (const auto& param : p.params)
        params.push_back({{"name", param.name}, {"type", to_string(param.type)}});
    j["params"] = std::move(params);
    j["body"] = expr_to_json(*p.body);
    return j;
}

Program program_from_json(const ordered_json& j) {
    Program p;
    p.id = j.at("id").get<std::string>();
    for (const auto& param : j.at("params")) {
        auto t = param_type_from(param.at("type").get<std::string>());
        if (!t) throw DslError(DslError::Code::UnknownParamType, "unknown ParamType in JSON");
        p.params.push_back({param.at("name").get<std::string>(), *t});
    }
    p.body = expr_from_json(j.at("body"));
    return p;
}

} // namespace repemp
