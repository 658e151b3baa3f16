#include "sigred/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sigred {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Flow and reconstruction deviations must stay below this bound.
constexpr double kFlowTolerance = 1e-6;

Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

Json strings(const std::vector<Expr>& es) {
    Json j = Json::array();
    for (const auto& e : es) j.push_back(to_string(e));
    return j;
}

Json matrix(const SigmaMatrix& m) {
    Json j = Json::array();
    for (const auto& r : m.entries) j.push_back(strings(r));
    return j;
}

Json fields_json(const std::vector<VectorField>& fs) {
    Json j = Json::array();
    for (const auto& f : fs) j.push_back(to_string(f));
    return j;
}

Json equations(const std::vector<ReducedEquation>& eqs) {
    Json j = Json::array();
    for (const auto& e : eqs) j.push_back(e.symbol + "' = " + to_string(e.rhs));
    return j;
}

struct Context {
    Problem p;
    RunOptions opt;
    Mode mode = Mode::Strict;
};

Context make_context(Problem p, const RunOptions& opt) {
    Context c{std::move(p), opt, Mode::Strict};
    for (auto* d : {&c.p.domain, &c.p.target_domain}) {
        if (opt.seed) d->seed = *opt.seed;
        if (opt.samples) d->count = *opt.samples;
        if (opt.tolerance) d->tolerance = *opt.tolerance;
        try {
            d->validate();
        } catch (const Error& e) {
            throw InputError(std::string("sampling options: ") + e.what());
        }
    }
    if (opt.t_end) c.p.t_end = *opt.t_end;
    if (opt.step) c.p.step = *opt.step;
    if (!(c.p.t_end > 0) || !(c.p.step > 0)) throw InputError("t-end and step must be positive");
    c.mode = opt.mode.value_or(c.p.mode);
    return c;
}

const SigmaMatrix& need_sigma(const Context& c) {
    if (!c.p.sigma) throw InputError("problem \"" + c.p.name + "\" has no sigma matrix");
    return *c.p.sigma;
}

const CoordinateChange& need_change(const Context& c) {
    if (!c.p.change) throw InputError("problem \"" + c.p.name + "\" has no coordinate change");
    return *c.p.change;
}

void need_fields(const Context& c) {
    if (c.p.fields.empty()) throw InputError("problem \"" + c.p.name + "\" has no fields");
}

Json stage_check(const Context& c) {
    need_fields(c);
    auto rep = check_sigma_symmetry(c.p.sys, c.p.fields, need_sigma(c), c.mode, c.p.domain);
    Json j;
    j["stage"] = "check";
    j["mode"] = c.mode == Mode::Orbital ? "orbital" : "strict";
    j["verdict"] = std::string(verdict_name(rep.verdict));
    j["strong"] = rep.strong;
    j["on_solutions"] = rep.on_solutions;
    j["residual"] = number(rep.residual);
    j["strong_residual"] = number(rep.strong_residual);
    if (c.mode == Mode::Orbital) {
        j["orbital_residual"] = number(rep.orbital_residual);
        Json s0 = Json::array();
        for (std::size_t i = 0; i < c.p.fields.size(); ++i) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& row : rep.sigma0) {
                if (i < row.size()) {
                    lo = std::min(lo, row[i]);
                    hi = std::max(hi, row[i]);
                }
            }
            s0.push_back({{"min", number(lo)}, {"max", number(hi)}});
        }
        j["sigma0"] = s0;
    }
    j["sigma_bar"] = matrix(rep.sigma_bar);
    j["pass"] = rep.verdict != Verdict::Fail;
    return j;
}

Json stage_solve_sigma(const Context& c) {
    need_fields(c);
    Json j;
    j["stage"] = "solve-sigma";
    try {
        auto sol = solve_sigma(c.p.sys, c.p.fields, c.p.domain);
        j["exact"] = sol.exact;
        if (sol.exact) j["sigma_bar"] = matrix(sol.sigma_bar);
        j["residual"] = number(sol.residual);
        bool match = true;
        if (sol.exact && c.p.sigma) {
            // Entries multiplying a vanishing Π(Xⱼ) are free; compare σ̄ᵢⱼ Π(Xⱼ).
            SigmaMatrix given = c.p.sigma->restricted(c.p.sys);
            auto det = determining_system(c.p.sys, c.p.fields);
            for (std::size_t i = 0; i < given.size(); ++i) {
                for (std::size_t a = 0; a < det.flow.size(); ++a) {
                    std::vector<Expr> lhs, rhs;
                    for (std::size_t b = 0; b < given.size(); ++b) {
                        lhs.push_back(given(i, b) * det.basis[b][a]);
                        rhs.push_back(sol.sigma_bar(i, b) * det.basis[b][a]);
                    }
                    match = match && equals_numeric(sum(lhs), sum(rhs), c.p.domain).equal;
                }
            }
            j["matches_given"] = match;
        }
        j["pass"] = sol.residual < c.p.domain.tolerance && match;
    } catch (const NoSolution& e) {
        j["error"] = e.what();
        j["pass"] = false;
    } catch (const RankDeficient& e) {
        j["error"] = e.what();
        j["pass"] = false;
    }
    return j;
}

std::vector<VectorField> prolonged(const Context& c) { return sigma_prolong(c.p.fields, need_sigma(c)); }

Json stage_prolong(const Context& c) {
    need_fields(c);
    auto y = prolonged(c);
    Json j;
    j["stage"] = "prolong";
    j["fields"] = fields_json(y);
    bool ok = true;
    Json inv = Json::array();
    for (const auto& g : c.p.invariants) {
        auto r = verify_invariant(c.p.fields, g, c.p.domain);
        inv.push_back({{"candidate", to_string(g)}, {"invariant", r.invariant}, {"residual", number(r.residual)}});
        ok = ok && r.invariant;
    }
    if (!inv.empty()) j["invariants"] = inv;
    Json betas = Json::array();
    for (const auto& g : c.p.betas) {
        auto r = verify_invariant(y, g, c.p.domain);
        betas.push_back({{"candidate", to_string(g)}, {"invariant", r.invariant}, {"residual", number(r.residual)}});
        ok = ok && r.invariant;
    }
    if (!betas.empty()) j["betas"] = betas;
    j["pass"] = ok;
    return j;
}

Json stage_complete(const Context& c) {
    need_fields(c);
    auto y = prolonged(c);
    auto res = complete_prolonged_set(y, c.p.domain);
    Json j;
    j["stage"] = "complete";
    j["r0"] = res.r0;
    j["r"] = res.r;
    j["n"] = res.n;
    j["delta"] = res.delta();
    j["theta"] = res.theta();
    j["kappa0"] = res.kappa0();
    j["added"] = fields_json(res.added);
    bool vanish = true;
    double worst = 0.0;
    auto all = res.all();
    for (std::size_t a = 0; a < all.size(); ++a) {
        for (std::size_t b = a + 1; b < all.size(); ++b) {
            auto br = lie_bracket(all[a], all[b]);
            for (const auto& comp : br.components()) {
                auto z = is_zero_numeric(comp, c.p.domain);
                worst = std::max(worst, z.residual);
                vanish = vanish && z.equal;
            }
        }
    }
    j["brackets_vanish"] = vanish;
    j["bracket_residual"] = number(worst);
    j["commuting_additions"] = res.commuting;
    if (!res.rho.empty()) {
        Json rho = Json::array();
        for (const auto& r : res.rho) rho.push_back(strings(r));
        j["rho"] = rho;
    }
    j["pass"] = res.commuting;
    return j;
}

struct Reduced {
    Json json;
    std::optional<ReductionResult> result;
};

Reduced stage_reduce(const Context& c) {
    const auto& ch = need_change(c);
    Reduced out;
    Json& j = out.json;
    j["stage"] = "reduce";
    auto v = validate_change(ch, c.p.domain, c.p.target_domain);
    j["change_valid"] = v.ok;
    if (!v.ok) j["change_failure"] = v.failure;
    auto t = transform_system(c.p.sys, ch);
    Json tr = Json::array();
    for (const auto& s : t.chart().states()) tr.push_back(s + "' = " + to_string(t.rhs_for(s)));
    j["transformed"] = tr;
    bool ok = v.ok;
    try {
        auto r = extract_reduced(t, ch, c.p.target_domain, c.mode);
        j["leakage"] = number(r.leakage);
        j["reduced"] = equations(r.reduced);
        j["reconstruction"] = equations(r.reconstruction);
        if (r.orbital) j["ratios"] = equations(r.ratios);
        j["split"] = std::to_string(r.reduced.size()) + " + " + std::to_string(r.reconstruction.size());
        out.result = std::move(r);
    } catch (const LeakageDetected& e) {
        j["error"] = e.what();
        ok = false;
    }
    if (c.p.sigma && c.p.fields.size() == ch.complementary.size()) {
        try {
            j["rectified"] = rectified_form_check(c.p.fields, prolonged(c), ch, *c.p.sigma, c.p.target_domain);
        } catch (const NotRectifying& e) {
            j["rectified"] = false;
            j["rectified_note"] = e.what();
        }
    }
    if (!c.p.betas.empty() && c.p.sigma) {
        auto fs = beta_forms(c.p.sys, prolonged(c), ch, c.p.betas, c.p.target_domain);
        Json bj = Json::array();
        for (const auto& f : fs) {
            bj.push_back({{"beta", to_string(f.beta)},
                          {"invariant", f.invariant},
                          {"value", to_string(f.value)},
                          {"reduced", f.reduced},
                          {"leakage", number(f.leakage)}});
        }
        j["beta_forms"] = bj;
    }
    j["pass"] = ok;
    return out;
}

Json stage_constants(const Context& c) {
    auto rep = verify_constants_of_motion(c.p.sys, c.p.fields, c.p.constants, c.p.domain);
    Json j;
    j["stage"] = "constants";
    j["n"] = rep.n;
    j["r"] = rep.r;
    j["bound"] = rep.bound;
    j["independent"] = rep.independent;
    Json rows = Json::array();
    for (const auto& k : rep.candidates) {
        rows.push_back({{"candidate", to_string(k.candidate)},
                        {"constant", k.constant},
                        {"invariant", k.invariant},
                        {"motion_residual", number(k.motion_residual)},
                        {"invariance_residual", number(k.invariance_residual)}});
    }
    j["candidates"] = rows;
    j["note"] = rep.note;
    bool ok = rep.all_pass;
    if (c.p.initial && !c.p.constants.empty()) {
        auto traj = integrate(c.p.sys, *c.p.initial, c.p.t_end, c.p.step);
        Json drift = Json::array();
        for (const auto& k : c.p.constants) {
            double d = traj.blow_up ? std::numeric_limits<double>::infinity() : invariant_drift(k, traj);
            drift.push_back(number(d));
            ok = ok && d < kFlowTolerance;
        }
        j["drift"] = drift;
    }
    j["pass"] = ok;
    return j;
}

Json stage_theorem4(const Context& c) {
    if (!c.p.theorem4) throw InputError("problem \"" + c.p.name + "\" has no theorem4 section");
    need_fields(c);
    const auto& t4 = *c.p.theorem4;
    auto res = theorem4_sigma(t4.simplified, c.p.fields, t4.alphas, c.p.domain);
    Json j;
    j["stage"] = "theorem4";
    j["sigma"] = matrix(res.sigma);
    j["identity_residual"] = number(res.identity_residual);
    j["identity_holds"] = res.identity_holds;
    auto full = theorem4_system(t4.simplified, c.p.fields, t4.alphas);
    bool same_system = true;
    for (const auto& s : c.p.sys.chart().states()) {
        same_system = same_system && equals_numeric(full.rhs_for(s), c.p.sys.rhs_for(s), c.p.domain).equal;
    }
    j["system_matches"] = same_system;
    bool ok = res.identity_holds && same_system;
    if (c.p.sigma) {
        bool structural = true, numeric = true;
        for (std::size_t a = 0; a < res.sigma.size(); ++a) {
            for (std::size_t b = 0; b < res.sigma.size(); ++b) {
                structural = structural && expand(res.sigma(a, b)) == expand((*c.p.sigma)(a, b));
                numeric = numeric && equals_numeric(res.sigma(a, b), (*c.p.sigma)(a, b), c.p.domain).equal;
            }
        }
        j["structural_match"] = structural;
        j["numeric_match"] = numeric;
        ok = ok && numeric;
    }
    j["pass"] = ok;
    return j;
}

State image(const std::vector<Expr>& maps, const std::vector<std::string>& symbols, const State& x) {
    Point p;
    for (std::size_t k = 0; k < x.size(); ++k) p.set(symbols[k], x[k]);
    State out;
    for (const auto& m : maps) out.push_back(evaluate(m, p));
    return out;
}

Json stage_flow(const Context& c, const ReductionResult& r) {
    const auto& ch = *c.p.change;
    Json j;
    j["stage"] = "flow";
    j["t_end"] = c.p.t_end;
    j["step"] = c.p.step;
    try {
        double dev = flow_consistency(c.p.sys, ch, *r.reduced_system, *c.p.initial, c.p.t_end, c.p.step);
        j["deviation"] = number(dev);
        bool ok = dev < kFlowTolerance;
        if (!r.reconstruction.empty()) {
            auto base = c.p.sys.chart().base_coordinates();
            auto full = integrate(c.p.sys, *c.p.initial, c.p.t_end, c.p.step);
            std::vector<Expr> zmap, ymap;
            for (const auto& z : ch.invariants) zmap.push_back(ch.forward.at(z));
            for (const auto& e : r.reconstruction) ymap.push_back(ch.forward.at(e.symbol));
            Point fixed;
            State p0 = image([&] {
                std::vector<Expr> m;
                for (const auto& q : ch.parameters) m.push_back(ch.forward.at(q));
                return m;
            }(), base, *c.p.initial);
            for (std::size_t k = 0; k < ch.parameters.size(); ++k) fixed.set(ch.parameters[k], p0[k]);
            // Reduced grid at half the step so stage times fall on nodes.
            auto z = integrate(*r.reduced_system, image(zmap, base, *c.p.initial), c.p.t_end, c.p.step / 2);
            auto y = reconstruct_along(z, r.reconstruction, image(ymap, base, *c.p.initial), c.p.step, fixed);
            if (full.blow_up || z.blow_up || y.blow_up) throw BlowUp("trajectory left the finite range");
            double worst = 0.0;
            for (std::size_t i = 0; i < y.rows.size() && i < full.rows.size(); ++i) {
                State want = image(ymap, base, full.rows[i]);
                for (std::size_t k = 0; k < want.size(); ++k) worst = std::max(worst, std::abs(want[k] - y.rows[i][k]));
            }
            j["reconstruction_deviation"] = number(worst);
            ok = ok && worst < kFlowTolerance;
        }
        j["pass"] = ok;
    } catch (const BlowUp& e) {
        j["error"] = e.what();
        j["pass"] = false;
    } catch (const DomainError& e) {
        j["error"] = e.what();
        j["pass"] = false;
    }
    return j;
}

Json stage_integrate(const Context& c) {
    if (!c.p.initial) throw InputError("problem \"" + c.p.name + "\" has no integrate.initial");
    auto traj = integrate(c.p.sys, *c.p.initial, c.p.t_end, c.p.step);
    Json j;
    j["stage"] = "integrate";
    j["t_end"] = c.p.t_end;
    j["step"] = traj.step;
    j["points"] = traj.rows.size();
    j["blow_up"] = traj.blow_up;
    Json fin = Json::object();
    for (std::size_t k = 0; k < traj.symbols.size(); ++k) fin[traj.symbols[k]] = number(traj.rows.back()[k]);
    j["final"] = fin;
    bool ok = !traj.blow_up;
    if (!c.p.constants.empty()) {
        Json drift = Json::array();
        for (const auto& k : c.p.constants) drift.push_back(number(invariant_drift(k, traj)));
        j["drift"] = drift;
    }
    if (c.opt.csv_dir) {
        std::filesystem::create_directories(*c.opt.csv_dir);
        auto path = *c.opt.csv_dir / (c.p.name + ".csv");
        write_csv(traj, path);
        j["csv"] = path.string();
    }
    j["pass"] = ok;
    return j;
}

template <class F>
Json timed(const Context& c, F&& f) {
    auto t0 = Clock::now();
    Json j = f();
    if (c.opt.timing) {
        j["seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
    }
    return j;
}

Json guarded(const Context& c, const char* name, const std::function<Json()>& f) {
    try {
        return timed(c, f);
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        Json j;
        j["stage"] = name;
        j["error"] = e.what();
        j["pass"] = false;
        return j;
    }
}

std::vector<Json> run_stages(const std::string& command, const Context& c) {
    std::vector<Json> out;
    if (command == "check") {
        out.push_back(guarded(c, "check", [&] { return stage_check(c); }));
    } else if (command == "solve-sigma") {
        out.push_back(guarded(c, "solve-sigma", [&] { return stage_solve_sigma(c); }));
    } else if (command == "prolong") {
        out.push_back(guarded(c, "prolong", [&] { return stage_prolong(c); }));
    } else if (command == "complete") {
        out.push_back(guarded(c, "complete", [&] { return stage_complete(c); }));
    } else if (command == "reduce") {
        out.push_back(guarded(c, "reduce", [&] { return stage_reduce(c).json; }));
    } else if (command == "constants") {
        out.push_back(guarded(c, "constants", [&] { return stage_constants(c); }));
    } else if (command == "theorem4") {
        out.push_back(guarded(c, "theorem4", [&] { return stage_theorem4(c); }));
    } else if (command == "integrate") {
        out.push_back(guarded(c, "integrate", [&] { return stage_integrate(c); }));
    } else if (command == "validate") {
        if (c.p.sigma && !c.p.fields.empty()) {
            out.push_back(guarded(c, "check", [&] { return stage_check(c); }));
            if (c.mode == Mode::Strict) out.push_back(guarded(c, "solve-sigma", [&] { return stage_solve_sigma(c); }));
            out.push_back(guarded(c, "prolong", [&] { return stage_prolong(c); }));
            // Completion uses the strict prolongation.
            if (c.mode == Mode::Strict) out.push_back(guarded(c, "complete", [&] { return stage_complete(c); }));
        }
        if (c.p.change) {
            std::optional<ReductionResult> red;
            out.push_back(guarded(c, "reduce", [&] {
                auto r = stage_reduce(c);
                red = std::move(r.result);
                return r.json;
            }));
            if (red && red->reduced_system && c.p.initial && c.mode == Mode::Strict) {
                out.push_back(guarded(c, "flow", [&] { return stage_flow(c, *red); }));
            }
        }
        if (!c.p.constants.empty()) out.push_back(guarded(c, "constants", [&] { return stage_constants(c); }));
        if (c.p.theorem4) out.push_back(guarded(c, "theorem4", [&] { return stage_theorem4(c); }));
    } else {
        throw InputError("unknown command \"" + command + "\"");
    }
    return out;
}

void render(std::ostringstream& os, const Json& j, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    auto scalar = [](const Json& v) -> std::string {
        if (v.is_null()) return "inf";
        if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
        if (v.is_number_float()) {
            std::ostringstream s;
            s << std::setprecision(6) << v.get<double>();
            return s.str();
        }
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (v.is_structured() && !v.empty()) {
                os << pad << k << ":\n";
                render(os, v, indent + 1);
            } else {
                os << pad << k << ": " << (v.is_structured() ? std::string("none") : scalar(v)) << '\n';
            }
        }
    } else if (j.is_array()) {
        bool flat = std::all_of(j.begin(), j.end(), [](const Json& v) { return !v.is_structured(); });
        if (flat && j.size() <= 4) {
            os << pad;
            for (std::size_t k = 0; k < j.size(); ++k) os << (k ? ", " : "") << scalar(j[k]);
            os << '\n';
            return;
        }
        for (const auto& v : j) {
            if (v.is_structured()) {
                os << pad << "-\n";
                render(os, v, indent + 1);
            } else {
                os << pad << "- " << scalar(v) << '\n';
            }
        }
    } else {
        os << pad << scalar(j) << '\n';
    }
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"check",     "solve-sigma", "prolong",   "complete", "reduce",
                                                "constants", "theorem4",    "integrate", "validate"};
    return names;
}

Report run_command(const std::string& command, Problem problem, const RunOptions& options) {
    Context c = make_context(std::move(problem), options);
    Report r;
    r.data["problem"] = c.p.name;
    r.data["command"] = command;
    r.data["seed"] = c.p.domain.seed;
    if (c.p.clock) r.data["notice"] = "time-dependent system autonomized with clock state " + *c.p.clock;
    auto stages = run_stages(command, c);
    bool ok = !stages.empty();
    for (const auto& s : stages) ok = ok && s.value("pass", false);
    r.data["stages"] = stages;
    r.data["pass"] = ok;
    r.pass = ok;
    return r;
}

Report run_corpus(const std::filesystem::path& dir, const RunOptions& options) {
    if (!std::filesystem::is_directory(dir)) throw InputError("corpus directory " + dir.string() + " not found");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("corpus directory " + dir.string() + " holds no problem file");
    Report r;
    r.data["command"] = "corpus";
    Json rows = Json::array();
    std::size_t passed = 0;
    auto t_all = Clock::now();
    for (const auto& f : files) {
        auto t0 = Clock::now();
        Json row;
        row["file"] = f.filename().string();
        try {
            Report one = run_command("validate", load_problem(f), options);
            row["problem"] = one.data["problem"];
            double worst = 0.0;
            for (const auto& s : one.data["stages"]) {
                // Orbital checks are judged by the orbital fit, not the strict residual.
                const char* fit = s.contains("orbital_residual") ? "orbital_residual" : "residual";
                for (const char* k : {fit, "leakage", "deviation"}) {
                    if (s.contains(k) && s[k].is_number()) worst = std::max(worst, s[k].get<double>());
                }
            }
            row["stages"] = one.data["stages"].size();
            row["worst_residual"] = worst;
            row["pass"] = one.pass;
            passed += one.pass ? 1 : 0;
        } catch (const Error& e) {
            row["error"] = e.what();
            row["pass"] = false;
        }
        if (options.timing) row["seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
        rows.push_back(row);
    }
    r.data["examples"] = rows;
    r.data["passed"] = std::to_string(passed) + "/" + std::to_string(files.size());
    if (options.timing) r.data["seconds"] = std::chrono::duration<double>(Clock::now() - t_all).count();
    r.pass = passed == files.size();
    r.data["pass"] = r.pass;
    return r;
}

std::string render_text(const Report& report) {
    std::ostringstream os;
    const Json& d = report.data;
    if (d.value("command", "") != "corpus") {
        render(os, d, 0);
        return os.str();
    }
    const bool timing = d.contains("seconds");
    os << std::left << std::setw(24) << "file" << std::setw(8) << "verdict" << std::setw(8) << "stages"
       << std::setw(14) << "worst";
    if (timing) os << "seconds";
    os << '\n';
    for (const auto& row : d["examples"]) {
        os << std::setw(24) << row["file"].get<std::string>() << std::setw(8)
           << (row["pass"].get<bool>() ? "pass" : "FAIL");
        if (row.contains("error")) {
            os << row["error"].get<std::string>() << '\n';
            continue;
        }
        std::ostringstream w;
        w << std::setprecision(6) << row["worst_residual"].get<double>();
        os << std::setw(8) << row["stages"].get<std::size_t>() << std::setw(14) << w.str();
        if (timing) os << std::setprecision(6) << row["seconds"].get<double>();
        os << '\n';
    }
    os << "passed: " << d["passed"].get<std::string>();
    if (timing) os << " in " << std::setprecision(6) << d["seconds"].get<double>() << " s";
    os << '\n';
    return os.str();
}

} // namespace sigred
