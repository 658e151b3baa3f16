#include "sigred/jet.hpp"

#include <algorithm>

namespace sigred {

namespace {

void require_symbols_in(const Expr& e, const Chart& chart, const std::string& where) {
    for (const auto& s : free_symbols(e)) {
        if (!chart.has(s)) throw UnknownSymbol(s + " (in " + where + ")");
    }
}

} // namespace

DynamicalSystem::DynamicalSystem(const Chart& chart, std::vector<Expr> rhs)
    : chart_(chart.with_time().jet_chart()), rhs_(std::move(rhs)) {
    auto states = chart_.states();
    if (rhs_.size() != states.size()) {
        throw SizeMismatch("system has " + std::to_string(rhs_.size()) + " right-hand sides for " +
                           std::to_string(states.size()) + " states");
    }
    for (std::size_t a = 0; a < states.size(); ++a) {
        require_symbols_in(rhs_[a], chart_, "rhs of " + states[a]);
        for (const auto& s : states) {
            if (depends_on(rhs_[a], Chart::jet_name(s))) {
                throw Error("rhs of " + states[a] + " depends on the state jet " + Chart::jet_name(s));
            }
        }
        restriction_.emplace(Chart::jet_name(states[a]), rhs_[a]);
    }
}

const Expr& DynamicalSystem::rhs_for(std::string_view state) const {
    auto states = chart_.states();
    for (std::size_t a = 0; a < states.size(); ++a) {
        if (states[a] == state) return rhs_[a];
    }
    throw UnknownSymbol(std::string(state));
}

bool DynamicalSystem::is_autonomous() const {
    const auto& t = *chart_.time();
    return std::none_of(rhs_.begin(), rhs_.end(), [&](const Expr& f) { return depends_on(f, t); });
}

VectorField DynamicalSystem::dynamical_field() const {
    std::vector<Expr> phi = rhs_;
    for (const auto& p : chart_.parameters()) phi.push_back(Expr::symbol(Chart::jet_name(p)));
    return VectorField(chart_, Expr(0), std::move(phi), std::nullopt, "X0");
}

SigmaMatrix::SigmaMatrix(std::vector<std::vector<Expr>> e) : entries(std::move(e)) {
    for (const auto& row : entries) {
        if (row.size() != entries.size()) throw SizeMismatch("sigma matrix must be square");
    }
}

SigmaMatrix SigmaMatrix::zero(std::size_t s) {
    return SigmaMatrix(std::vector<std::vector<Expr>>(s, std::vector<Expr>(s, Expr(0))));
}

SigmaMatrix SigmaMatrix::restricted(const DynamicalSystem& sys) const {
    SigmaMatrix out = *this;
    for (auto& row : out.entries) {
        for (auto& e : row) e = sys.restrict(e);
    }
    return out;
}

DynamicalSystem autonomize(const DynamicalSystem& sys) {
    if (sys.is_autonomous()) throw AlreadyAutonomous();
    const Chart& c = sys.chart();
    std::string clock = "x0";
    while (c.has(clock)) clock += "_";
    std::vector<std::string> states{clock};
    auto old_states = c.states();
    states.insert(states.end(), old_states.begin(), old_states.end());
    Chart chart = Chart::make(*c.time(), states, c.parameters());
    Substitution t_to_clock{{*c.time(), Expr::symbol(clock)}};
    std::vector<Expr> rhs{Expr(1)};
    for (const auto& f : sys.rhs()) rhs.push_back(substitute(f, t_to_clock));
    return DynamicalSystem(chart, std::move(rhs));
}

Expr total_derivative(const Expr& g, const Chart& chart) {
    for (const auto& j : chart.jets()) {
        if (depends_on(g, j)) {
            throw OrderOverflow("total derivative of an expression depending on " + j +
                                " needs second-order jets");
        }
    }
    std::vector<Expr> terms;
    if (chart.time()) terms.push_back(differentiate(g, *chart.time()));
    for (const auto& b : chart.base_coordinates()) {
        Expr d = differentiate(g, b);
        if (!d.is_zero()) terms.push_back(Expr::symbol(Chart::jet_name(b)) * d);
    }
    return sum(std::move(terms));
}

Expr total_derivative(const Expr& g, const DynamicalSystem& sys) {
    Expr r = sys.restrict(g);
    for (const auto& p : sys.parameters()) {
        if (depends_on(r, Chart::jet_name(p))) {
            throw OrderOverflow("restricted expression depends on the parameter speed " + Chart::jet_name(p));
        }
    }
    Expr dt = differentiate(r, *sys.chart().time());
    return sum({dt, apply(sys.dynamical_field(), r)});
}

std::vector<VectorField> sigma_prolong(const std::vector<VectorField>& fields, const SigmaMatrix& sigma) {
    const std::size_t s = fields.size();
    if (sigma.size() != s) {
        throw SizeMismatch("sigma is " + std::to_string(sigma.size()) + "x" + std::to_string(sigma.size()) + " for " +
                           std::to_string(s) + " fields");
    }
    std::vector<VectorField> out;
    if (s == 0) return out;
    const Chart& chart = fields.front().chart();
    if (!chart.is_jet_chart()) throw ChartMismatch("sigma-prolongation needs a jet chart");
    auto base = chart.base_coordinates();
    const std::size_t n = base.size();
    std::vector<Expr> jets;
    for (const auto& b : base) jets.push_back(Expr::symbol(Chart::jet_name(b)));

    // Evolutionary parts φᵃⱼ − ẋᵃ ξⱼ, shared by every row.
    std::vector<std::vector<Expr>> q(s, std::vector<Expr>(n));
    for (std::size_t j = 0; j < s; ++j) {
        if (!(fields[j].chart() == chart)) throw ChartMismatch("fields live on different charts");
        for (std::size_t a = 0; a < n; ++a) q[j][a] = fields[j].phi()[a] - jets[a] * fields[j].xi();
    }
    for (std::size_t i = 0; i < s; ++i) {
        const auto& f = fields[i];
        Expr dxi = total_derivative(f.xi(), chart);
        std::vector<Expr> psi(n);
        for (std::size_t a = 0; a < n; ++a) {
            std::vector<Expr> terms{total_derivative(f.phi()[a], chart), -(jets[a] * dxi)};
            for (std::size_t j = 0; j < s; ++j) {
                if (!sigma(i, j).is_zero()) terms.push_back(sigma(i, j) * q[j][a]);
            }
            psi[a] = expand(sum(std::move(terms)));
        }
        out.emplace_back(chart, f.xi(), f.phi(), std::move(psi), f.label().empty() ? "" : "Y" + f.label().substr(1));
    }
    return out;
}

Expr derived_invariant(const Expr& z1, const Expr& z2, const Chart& chart) {
    Expr den = total_derivative(z2, chart);
    if (den.is_zero()) throw ZeroDenominator("D_t of the second invariant vanishes identically");
    Expr num = total_derivative(z1, chart);
    if (num.is_zero()) return Expr(0);
    if (den.is_one()) return num;
    return num * pow(den, Rational(-1));
}

InvariantCheck verify_invariant(const std::vector<VectorField>& fields, const Expr& g, const SampleDomain& domain) {
    InvariantCheck out;
    for (const auto& f : fields) {
        Expr y = apply(f, g);
        double r = 0.0;
        bool ok = true;
        if (!y.is_zero()) {
            auto c = is_zero_numeric(y, domain);
            r = c.residual;
            ok = c.equal;
        }
        out.per_field.push_back(r);
        out.residual = std::max(out.residual, r);
        out.invariant = out.invariant && ok;
    }
    return out;
}

} // namespace sigred
