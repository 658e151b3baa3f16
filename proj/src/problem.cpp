#include "sigred/problem.hpp"

#include <fstream>
#include <sstream>

#include "sigred/parser.hpp"

namespace sigred {

namespace {

std::string located(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
}

} // namespace

InputError::InputError(const std::string& what, std::size_t line, std::size_t column)
    : Error(located(what, line, column)), line_(line), column_(column) {}

namespace {

using Json = nlohmann::ordered_json;

struct Position {
    std::size_t line = 0;
    std::size_t column = 0;
};

Position position_of(const std::string& text, std::size_t offset) {
    Position p{1, 1};
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

// Reads expressions and reports failures at their place in the file.
class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& what, const std::string& near = {}, std::size_t offset = 0) const {
        if (!near.empty()) {
            std::string quoted = Json(near).dump();
            auto at = text_.find(quoted);
            if (at != std::string::npos) {
                Position p = position_of(text_, at + 1 + offset);
                throw InputError(what, p.line, p.column);
            }
        }
        throw InputError(what);
    }

    Expr expr(const Json& j, const Chart& chart, const std::string& where) const {
        if (!j.is_string()) fail(where + ": expected an expression string");
        const std::string s = j.get<std::string>();
        try {
            return parse(s, chart);
        } catch (const SyntaxError& e) {
            fail(where + ": " + e.what(), s, e.position());
        } catch (const UnknownSymbol& e) {
            fail(where + ": " + e.what(), s, s.find(e.name()) == std::string::npos ? 0 : s.find(e.name()));
        }
    }

    std::vector<Expr> exprs(const Json& j, const Chart& chart, const std::string& where) const {
        if (!j.is_array()) fail(where + ": expected a list of expression strings");
        std::vector<Expr> out;
        for (std::size_t k = 0; k < j.size(); ++k) out.push_back(expr(j[k], chart, where + "[" + std::to_string(k) + "]"));
        return out;
    }

    std::string str(const Json& obj, const char* key, const std::string& where, const char* fallback = nullptr) const {
        if (!obj.contains(key)) {
            if (fallback) return fallback;
            fail(where + ": missing \"" + key + "\"");
        }
        if (!obj[key].is_string()) fail(where + "." + key + ": expected a string");
        return obj[key].get<std::string>();
    }

    std::vector<std::string> names(const Json& j, const std::string& where) const {
        if (!j.is_array()) fail(where + ": expected a list of names");
        std::vector<std::string> out;
        for (const auto& e : j) {
            if (!e.is_string()) fail(where + ": expected a list of names");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    double number(const Json& j, const std::string& where) const {
        if (!j.is_number()) fail(where + ": expected a number");
        return j.get<double>();
    }

private:
    const std::string& text_;
};

void read_domain(const Reader& rd, const Json& j, SampleDomain& d, const std::string& where) {
    if (!j.is_object()) rd.fail(where + ": expected an object");
    auto interval = [&](const Json& v, const std::string& w) {
        if (!v.is_array() || v.size() != 2) rd.fail(w + ": expected [lo, hi]");
        return Interval{rd.number(v[0], w), rd.number(v[1], w)};
    };
    if (j.contains("bounds")) {
        if (!j["bounds"].is_object()) rd.fail(where + ".bounds: expected an object");
        for (const auto& [k, v] : j["bounds"].items()) d.bounds[k] = interval(v, where + ".bounds." + k);
    }
    if (j.contains("fallback")) d.fallback = interval(j["fallback"], where + ".fallback");
    if (j.contains("count")) d.count = static_cast<std::size_t>(rd.number(j["count"], where + ".count"));
    if (j.contains("tolerance")) d.tolerance = rd.number(j["tolerance"], where + ".tolerance");
    if (j.contains("guard")) d.guard = rd.number(j["guard"], where + ".guard");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) rd.fail(where + ".seed: expected a non-negative integer");
        d.seed = j["seed"].get<std::uint64_t>();
    }
    try {
        d.validate();
    } catch (const Error& e) {
        rd.fail(where + ": " + e.what());
    }
}

Json write_domain(const SampleDomain& d) {
    Json j;
    Json b = Json::object();
    for (const auto& [k, v] : d.bounds) b[k] = {v.lo, v.hi};
    j["bounds"] = b;
    j["fallback"] = {d.fallback.lo, d.fallback.hi};
    j["count"] = d.count;
    j["tolerance"] = d.tolerance;
    j["guard"] = d.guard;
    j["seed"] = d.seed;
    return j;
}

Json write_map(const Substitution& m, const std::vector<std::string>& order) {
    Json j = Json::object();
    for (const auto& k : order) {
        auto it = m.find(k);
        if (it != m.end()) j[k] = to_string(it->second);
    }
    return j;
}

Json write_exprs(const std::vector<Expr>& es) {
    Json j = Json::array();
    for (const auto& e : es) j.push_back(to_string(e));
    return j;
}

} // namespace

Problem parse_problem(const std::string& text, bool autonomize_input) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        Position p = position_of(text, e.byte == 0 ? 0 : e.byte - 1);
        throw InputError("invalid JSON", p.line, p.column);
    }
    Reader rd(text);
    if (!j.is_object()) rd.fail("top level: expected an object");
    Problem p;
    p.name = rd.str(j, "name", "top level");
    p.description = rd.str(j, "description", "top level", "");
    std::string time = rd.str(j, "time", "top level", "t");

    if (!j.contains("coordinates")) rd.fail("top level: missing \"coordinates\"");
    const Json& coords = j["coordinates"];
    if (!coords.is_array() || coords.empty()) rd.fail("coordinates: expected a non-empty list");
    std::vector<std::string> states, params;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const Json& c = coords[k];
        std::string where = "coordinates[" + std::to_string(k) + "]";
        if (c.is_string()) {
            states.push_back(c.get<std::string>());
            continue;
        }
        if (!c.is_object()) rd.fail(where + ": expected a name or {name, role}");
        std::string name = rd.str(c, "name", where);
        std::string role = rd.str(c, "role", where, "state");
        if (role == "state") {
            states.push_back(name);
        } else if (role == "parameter") {
            params.push_back(name);
        } else {
            rd.fail(where + ": role must be \"state\" or \"parameter\"", role);
        }
    }
    Chart chart;
    try {
        chart = Chart::make(time, states, params);
    } catch (const Error& e) {
        rd.fail(std::string("coordinates: ") + e.what());
    }

    if (!j.contains("rhs") || !j["rhs"].is_object()) rd.fail("top level: missing \"rhs\" object");
    const Json& rhs = j["rhs"];
    for (const auto& [k, v] : rhs.items()) {
        if (std::find(states.begin(), states.end(), k) == states.end()) {
            rd.fail("rhs: \"" + k + "\" is not a state coordinate", k);
        }
    }
    std::vector<Expr> f;
    for (const auto& s : states) {
        if (!rhs.contains(s)) rd.fail("rhs: no right-hand side for " + s);
        f.push_back(rd.expr(rhs[s], chart, "rhs." + s));
    }
    try {
        p.sys = DynamicalSystem(chart, f);
    } catch (const Error& e) {
        rd.fail(std::string("rhs: ") + e.what());
    }
    const Chart& jc = p.sys.chart();
    const std::size_t n = jc.base_coordinates().size();

    if (j.contains("fields")) {
        if (!j["fields"].is_array()) rd.fail("fields: expected a list");
        for (std::size_t k = 0; k < j["fields"].size(); ++k) {
            const Json& fj = j["fields"][k];
            std::string where = "fields[" + std::to_string(k) + "]";
            if (!fj.is_object()) rd.fail(where + ": expected {name, xi, phi}");
            std::string label = rd.str(fj, "name", where, "");
            if (label.empty()) label = "X" + std::to_string(k + 1);
            Expr xi = fj.contains("xi") ? rd.expr(fj["xi"], jc, where + ".xi") : Expr(0);
            if (!fj.contains("phi")) rd.fail(where + ": missing \"phi\"");
            auto phi = rd.exprs(fj["phi"], jc, where + ".phi");
            if (phi.size() != n) {
                rd.fail(where + ".phi: expected " + std::to_string(n) + " components, one per coordinate");
            }
            p.fields.emplace_back(jc, xi, phi, std::nullopt, label);
        }
    }

    if (j.contains("sigma")) {
        const Json& sj = j["sigma"];
        if (!sj.is_array() || sj.size() != p.fields.size()) rd.fail("sigma: expected one row per field");
        std::vector<std::vector<Expr>> rows;
        for (std::size_t i = 0; i < sj.size(); ++i) {
            rows.push_back(rd.exprs(sj[i], jc, "sigma[" + std::to_string(i) + "]"));
            if (rows.back().size() != p.fields.size()) rd.fail("sigma: the matrix must be square");
        }
        p.sigma = SigmaMatrix(rows);
    }

    std::string mode = rd.str(j, "mode", "top level", "strict");
    if (mode == "strict") {
        p.mode = Mode::Strict;
    } else if (mode == "orbital") {
        p.mode = Mode::Orbital;
    } else {
        rd.fail("mode: expected \"strict\" or \"orbital\"", mode);
    }

    if (j.contains("domain")) read_domain(rd, j["domain"], p.domain, "domain");
    p.target_domain = p.domain;
    p.target_domain.bounds.clear();
    if (j.contains("target_domain")) read_domain(rd, j["target_domain"], p.target_domain, "target_domain");

    if (j.contains("change")) {
        const Json& cj = j["change"];
        if (!cj.is_object()) rd.fail("change: expected an object");
        CoordinateChange ch;
        ch.source = jc;
        if (!cj.contains("invariants") || !cj.contains("complementary")) {
            rd.fail("change: \"invariants\" and \"complementary\" are required");
        }
        ch.invariants = rd.names(cj["invariants"], "change.invariants");
        ch.complementary = rd.names(cj["complementary"], "change.complementary");
        if (cj.contains("parameters")) ch.parameters = rd.names(cj["parameters"], "change.parameters");
        for (const auto& q : ch.parameters) {
            if (std::find(ch.complementary.begin(), ch.complementary.end(), q) == ch.complementary.end()) {
                rd.fail("change.parameters: " + q + " must also be complementary");
            }
        }
        Chart target;
        try {
            target = ch.target_chart();
        } catch (const Error& e) {
            rd.fail(std::string("change: ") + e.what());
        }
        if (!cj.contains("forward") || !cj["forward"].is_object()) rd.fail("change: missing \"forward\" object");
        for (const auto& u : ch.target_symbols()) {
            if (!cj["forward"].contains(u)) rd.fail("change.forward: no map for " + u);
            ch.forward[u] = rd.expr(cj["forward"][u], jc, "change.forward." + u);
        }
        if (cj.contains("inverse")) {
            if (!cj["inverse"].is_object()) rd.fail("change.inverse: expected an object");
            for (const auto& [k, v] : cj["inverse"].items()) {
                if (!jc.has(k)) rd.fail("change.inverse: \"" + k + "\" is not a coordinate", k);
                ch.inverse[k] = rd.expr(v, target, "change.inverse." + k);
            }
        }
        p.change = std::move(ch);
    }

    if (j.contains("candidates")) {
        const Json& cj = j["candidates"];
        if (!cj.is_object()) rd.fail("candidates: expected an object");
        if (cj.contains("invariants")) p.invariants = rd.exprs(cj["invariants"], jc, "candidates.invariants");
        if (cj.contains("betas")) p.betas = rd.exprs(cj["betas"], jc, "candidates.betas");
        if (cj.contains("constants")) p.constants = rd.exprs(cj["constants"], jc, "candidates.constants");
    }

    if (j.contains("theorem4")) {
        const Json& tj = j["theorem4"];
        if (!tj.is_object() || !tj.contains("simplified") || !tj.contains("alphas")) {
            rd.fail("theorem4: expected {simplified, alphas}");
        }
        std::vector<Expr> g;
        for (const auto& s : states) {
            if (!tj["simplified"].contains(s)) rd.fail("theorem4.simplified: no right-hand side for " + s);
            g.push_back(rd.expr(tj["simplified"][s], chart, "theorem4.simplified." + s));
        }
        Theorem4Input t4{DynamicalSystem(chart, g), rd.exprs(tj["alphas"], jc, "theorem4.alphas")};
        if (t4.alphas.size() != p.fields.size()) rd.fail("theorem4.alphas: expected one per field");
        p.theorem4 = std::move(t4);
    }

    if (j.contains("integrate")) {
        const Json& ij = j["integrate"];
        if (!ij.is_object()) rd.fail("integrate: expected an object");
        if (ij.contains("initial")) {
            const Json& x0 = ij["initial"];
            if (!x0.is_object()) rd.fail("integrate.initial: expected {coordinate: value}");
            State s;
            for (const auto& b : jc.base_coordinates()) {
                if (!x0.contains(b)) rd.fail("integrate.initial: no value for " + b);
                s.push_back(rd.number(x0[b], "integrate.initial." + b));
            }
            p.initial = s;
        }
        if (ij.contains("t_end")) p.t_end = rd.number(ij["t_end"], "integrate.t_end");
        if (ij.contains("step")) p.step = rd.number(ij["step"], "integrate.step");
        if (!(p.t_end > 0) || !(p.step > 0)) rd.fail("integrate: t_end and step must be positive");
    }

    if (!p.sys.is_autonomous()) {
        if (!autonomize_input) rd.fail("the right-hand side depends on " + time + " (autonomization disabled)");
        if (p.change) rd.fail("change: a time-dependent system cannot carry a coordinate change; autonomize it first");
        DynamicalSystem a = autonomize(p.sys);
        std::string clock = a.chart().states().front();
        Substitution sub{{time, Expr::symbol(clock)}};
        auto move = [&](const Expr& e) { return substitute(e, sub); };
        const Chart& ac = a.chart();
        std::vector<VectorField> fields;
        for (const auto& fld : p.fields) {
            std::vector<Expr> phi{move(fld.xi())};
            for (const auto& c : fld.phi()) phi.push_back(move(c));
            fields.emplace_back(ac, Expr(0), phi, std::nullopt, fld.label());
        }
        p.fields = std::move(fields);
        if (p.sigma) {
            auto rows = p.sigma->entries;
            for (auto& r : rows)
                for (auto& e : r) e = move(e);
            p.sigma = SigmaMatrix(rows);
        }
        for (auto* list : {&p.invariants, &p.betas, &p.constants})
            for (auto& e : *list) e = move(e);
        if (p.initial) p.initial->insert(p.initial->begin(), 0.0);
        p.sys = std::move(a);
        p.clock = clock;
    }
    return p;
}

Problem load_problem(const std::filesystem::path& path, bool autonomize_input) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str(), autonomize_input);
}

nlohmann::ordered_json to_json(const Problem& p) {
    Json j;
    const Chart& c = p.sys.chart();
    j["name"] = p.name;
    if (!p.description.empty()) j["description"] = p.description;
    j["time"] = c.time() ? *c.time() : "t";
    Json coords = Json::array();
    for (const auto& s : c.states()) coords.push_back({{"name", s}, {"role", "state"}});
    for (const auto& s : c.parameters()) coords.push_back({{"name", s}, {"role", "parameter"}});
    j["coordinates"] = coords;
    Json rhs = Json::object();
    for (const auto& s : c.states()) rhs[s] = to_string(p.sys.rhs_for(s));
    j["rhs"] = rhs;
    if (!p.fields.empty()) {
        Json fs = Json::array();
        for (const auto& f : p.fields) {
            fs.push_back({{"name", f.label()}, {"xi", to_string(f.xi())}, {"phi", write_exprs(f.phi())}});
        }
        j["fields"] = fs;
    }
    if (p.sigma) {
        Json rows = Json::array();
        for (const auto& r : p.sigma->entries) rows.push_back(write_exprs(r));
        j["sigma"] = rows;
    }
    j["mode"] = p.mode == Mode::Orbital ? "orbital" : "strict";
    if (p.change) {
        const auto& ch = *p.change;
        Json cj;
        cj["invariants"] = ch.invariants;
        cj["complementary"] = ch.complementary;
        if (!ch.parameters.empty()) cj["parameters"] = ch.parameters;
        cj["forward"] = write_map(ch.forward, ch.target_symbols());
        cj["inverse"] = write_map(ch.inverse, c.base_coordinates());
        j["change"] = cj;
    }
    if (!p.invariants.empty() || !p.betas.empty() || !p.constants.empty()) {
        Json cj = Json::object();
        if (!p.invariants.empty()) cj["invariants"] = write_exprs(p.invariants);
        if (!p.betas.empty()) cj["betas"] = write_exprs(p.betas);
        if (!p.constants.empty()) cj["constants"] = write_exprs(p.constants);
        j["candidates"] = cj;
    }
    if (p.theorem4) {
        Json s = Json::object();
        for (const auto& x : c.states()) s[x] = to_string(p.theorem4->simplified.rhs_for(x));
        j["theorem4"] = {{"simplified", s}, {"alphas", write_exprs(p.theorem4->alphas)}};
    }
    j["domain"] = write_domain(p.domain);
    j["target_domain"] = write_domain(p.target_domain);
    Json ij;
    if (p.initial) {
        Json x0 = Json::object();
        auto base = c.base_coordinates();
        for (std::size_t k = 0; k < base.size(); ++k) x0[base[k]] = (*p.initial)[k];
        ij["initial"] = x0;
    }
    ij["t_end"] = p.t_end;
    ij["step"] = p.step;
    j["integrate"] = ij;
    return j;
}

} // namespace sigred
