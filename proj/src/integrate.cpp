#include "sigred/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

namespace sigred {

std::size_t Trajectory::column(std::string_view symbol) const {
    auto it = std::find(symbols.begin(), symbols.end(), symbol);
    if (it == symbols.end()) throw Error("trajectory has no column " + std::string(symbol));
    return static_cast<std::size_t>(it - symbols.begin());
}

State Trajectory::at(double t) const {
    if (rows.empty()) throw Error("empty trajectory");
    if (rows.size() == 1 || t <= times.front()) return rows.front();
    if (t >= times.back()) return rows.back();
    auto k = static_cast<std::size_t>(std::floor((t - times.front()) / step));
    k = std::min(k, rows.size() - 2);
    double w = (t - times[k]) / (times[k + 1] - times[k]);
    State out(rows[k].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1 - w) * rows[k][i] + w * rows[k + 1][i];
    return out;
}

namespace {

std::size_t steps_for(double t_end, double h) {
    if (!(h > 0) || !(t_end > 0) || !std::isfinite(t_end) || !std::isfinite(h)) {
        throw Error("integration needs t_end > 0 and h > 0");
    }
    return static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
}

bool finite(const State& s) {
    return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
}

// Rates of `exprs` at time t, state y.
using Rates = std::function<bool(double t, const State& y, State& out)>;

Trajectory rk4(std::vector<std::string> symbols, const Rates& f, const State& y0, double t_end, double h) {
    std::size_t n = steps_for(t_end, h);
    Trajectory tr;
    tr.symbols = std::move(symbols);
    tr.step = t_end / static_cast<double>(n);
    tr.times.push_back(0.0);
    tr.rows.push_back(y0);
    const double dt = tr.step;
    const std::size_t d = y0.size();
    State k1(d), k2(d), k3(d), k4(d), tmp(d);
    State y = y0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = dt * static_cast<double>(i);
        auto stage = [&](const State& base, const State& k, double c, State& out, double tc) {
            for (std::size_t j = 0; j < d; ++j) tmp[j] = base[j] + c * k[j];
            return f(tc, tmp, out) && finite(out);
        };
        bool ok = f(t, y, k1) && finite(k1);
        ok = ok && stage(y, k1, dt / 2, k2, t + dt / 2);
        ok = ok && stage(y, k2, dt / 2, k3, t + dt / 2);
        ok = ok && stage(y, k3, dt, k4, t + dt);
        if (ok) {
            for (std::size_t j = 0; j < d; ++j) y[j] += dt / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
            ok = finite(y);
        }
        if (!ok) {
            tr.blow_up = true;
            break;
        }
        tr.times.push_back(dt * static_cast<double>(i + 1));
        tr.rows.push_back(y);
    }
    return tr;
}

bool eval_all(const std::vector<Expr>& exprs, const Point& p, State& out) {
    try {
        for (std::size_t j = 0; j < exprs.size(); ++j) out[j] = evaluate(exprs[j], p);
    } catch (const DomainError&) {
        return false;
    }
    return true;
}

} // namespace

Trajectory integrate(const DynamicalSystem& sys, const State& x0, double t_end, double h) {
    const Chart& chart = sys.chart();
    auto base = chart.base_coordinates();
    if (x0.size() != base.size()) throw SizeMismatch("initial state must bind every base coordinate");
    if (auto t = chart.time()) {
        for (const auto& e : sys.rhs()) {
            if (free_symbols(e).count(*t)) throw Error("integrate needs an autonomous system");
        }
    }
    auto states = chart.states();
    std::vector<Expr> rates;
    for (const auto& b : base) {
        bool is_state = std::find(states.begin(), states.end(), b) != states.end();
        rates.push_back(is_state ? sys.rhs_for(b) : Expr(0));
    }
    Point p;
    for (const auto& b : base) p.set(b, 0.0);
    for (const auto& q : chart.parameters()) p.set(Chart::jet_name(q), 0.0);
    Rates f = [&](double, const State& y, State& out) {
        for (std::size_t j = 0; j < base.size(); ++j) p.set(base[j], y[j]);
        return eval_all(rates, p, out);
    };
    return rk4(base, f, x0, t_end, h);
}

Trajectory reconstruct_along(const Trajectory& reduced, const std::vector<ReducedEquation>& reconstruction,
                             const State& y0, double h, const Point& fixed) {
    if (y0.size() != reconstruction.size()) throw SizeMismatch("one initial value per reconstruction equation");
    if (reduced.rows.empty()) throw Error("empty reduced trajectory");
    std::vector<std::string> symbols;
    std::vector<Expr> rates;
    for (const auto& r : reconstruction) {
        symbols.push_back(r.symbol);
        rates.push_back(r.rhs);
    }
    Point p;
    for (const auto& [name, v] : fixed.entries()) p.set(name, v);
    for (const auto& r : reconstruction) {
        for (const auto& s : free_symbols(r.rhs)) {
            if (s.ends_with('\'') && !p.find(s)) p.set(s, 0.0);
        }
    }
    Rates f = [&](double t, const State& y, State& out) {
        State z = reduced.at(t);
        for (std::size_t j = 0; j < z.size(); ++j) p.set(reduced.symbols[j], z[j]);
        for (std::size_t j = 0; j < y.size(); ++j) p.set(symbols[j], y[j]);
        return eval_all(rates, p, out);
    };
    return rk4(symbols, f, y0, reduced.times.back(), h);
}

double flow_consistency(const DynamicalSystem& full, const CoordinateChange& change, const DynamicalSystem& reduced,
                        const State& x0, double t_end, double h) {
    Trajectory big = integrate(full, x0, t_end, h);
    if (big.blow_up) throw BlowUp("full system left the finite range");
    auto zs = reduced.chart().states();
    std::vector<Expr> image;
    for (const auto& z : zs) {
        auto it = change.forward.find(z);
        if (it == change.forward.end()) throw ValidationFailed("no forward map given for " + z);
        image.push_back(it->second);
    }
    auto map = [&](const State& x) {
        Point p;
        for (std::size_t j = 0; j < x.size(); ++j) p.set(big.symbols[j], x[j]);
        State out(image.size());
        for (std::size_t j = 0; j < image.size(); ++j) out[j] = evaluate(image[j], p);
        return out;
    };
    Trajectory small = integrate(reduced, map(x0), t_end, h);
    if (small.blow_up) throw BlowUp("reduced system left the finite range");
    double worst = 0.0;
    for (std::size_t i = 0; i < big.rows.size() && i < small.rows.size(); ++i) {
        State z = map(big.rows[i]);
        for (std::size_t j = 0; j < z.size(); ++j) worst = std::max(worst, std::abs(z[j] - small.rows[i][j]));
    }
    return worst;
}

double invariant_drift(const Expr& invariant, const Trajectory& traj) {
    if (traj.rows.empty()) return 0.0;
    auto value = [&](const State& x) {
        Point p;
        for (std::size_t j = 0; j < x.size(); ++j) p.set(traj.symbols[j], x[j]);
        return evaluate(invariant, p);
    };
    double i0 = value(traj.rows.front());
    double worst = 0.0;
    for (const auto& row : traj.rows) worst = std::max(worst, std::abs(value(row) - i0) / (1 + std::abs(i0)));
    return worst;
}

void write_csv(const Trajectory& traj, std::ostream& os) {
    os << "t";
    for (const auto& s : traj.symbols) os << ',' << s;
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < traj.rows.size(); ++i) {
        os << traj.times[i];
        for (double v : traj.rows[i]) os << ',' << v;
        os << '\n';
    }
}

void write_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os.imbue(std::locale::classic());
    write_csv(traj, os);
}

} // namespace sigred
