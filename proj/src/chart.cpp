#include "sigred/chart.hpp"

#include <algorithm>

#include "sigred/errors.hpp"

namespace sigred {

std::string_view role_name(Role role) {
    switch (role) {
    case Role::Time: return "time";
    case Role::State: return "state";
    case Role::Parameter: return "parameter";
    case Role::Jet: return "jet";
    }
    return "?";
}

Chart Chart::make(std::optional<std::string> time, const std::vector<std::string>& states,
                  const std::vector<std::string>& parameters, bool with_jets) {
    Chart c;
    if (time) c.add(*time, Role::Time);
    for (const auto& s : states) c.add(s, Role::State);
    for (const auto& p : parameters) c.add(p, Role::Parameter);
    if (with_jets) {
        for (const auto& s : states) c.add(jet_name(s), Role::Jet);
        for (const auto& p : parameters) c.add(jet_name(p), Role::Jet);
    }
    return c;
}

void Chart::add(std::string name, Role role) {
    if (name.empty()) throw Error("empty symbol name");
    if (has(name)) throw Error("duplicate symbol '" + name + "'");
    std::string base;
    if (role == Role::Jet) {
        if (name.back() != '\'') throw Error("jet symbol '" + name + "' must end with an apostrophe");
        base = name.substr(0, name.size() - 1);
        auto r = role_of(base);
        if (!r || (*r != Role::State && *r != Role::Parameter)) {
            throw Error("jet symbol '" + name + "' has no base coordinate");
        }
    } else if (name.back() == '\'') {
        throw Error("only jet symbols may end with an apostrophe: '" + name + "'");
    }
    if (role == Role::Time) {
        if (time_) throw Error("chart already has a time symbol");
        time_ = name;
    }
    symbols_.push_back({std::move(name), role, std::move(base)});
}

bool Chart::has(std::string_view name) const { return role_of(name).has_value(); }

std::optional<Role> Chart::role_of(std::string_view name) const {
    for (const auto& s : symbols_) {
        if (s.name == name) return s.role;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> names_with(const std::vector<ChartSymbol>& symbols, Role role) {
    std::vector<std::string> out;
    for (const auto& s : symbols) {
        if (s.role == role) out.push_back(s.name);
    }
    return out;
}

} // namespace

std::vector<std::string> Chart::states() const { return names_with(symbols_, Role::State); }
std::vector<std::string> Chart::parameters() const { return names_with(symbols_, Role::Parameter); }
std::vector<std::string> Chart::jets() const { return names_with(symbols_, Role::Jet); }

std::vector<std::string> Chart::base_coordinates() const {
    auto out = states();
    auto p = parameters();
    out.insert(out.end(), p.begin(), p.end());
    return out;
}

bool Chart::is_jet_chart() const {
    auto base = base_coordinates();
    return !base.empty() && std::all_of(base.begin(), base.end(), [&](const std::string& b) { return has(jet_name(b)); });
}

Chart Chart::base_chart() const {
    Chart c;
    for (const auto& s : symbols_) {
        if (s.role != Role::Jet) c.add(s.name, s.role);
    }
    return c;
}

Chart Chart::jet_chart() const {
    Chart c = base_chart();
    for (const auto& b : base_coordinates()) c.add(jet_name(b), Role::Jet);
    return c;
}

Chart Chart::with_time(const std::string& name) const {
    if (time_) return *this;
    Chart c;
    c.add(name, Role::Time);
    for (const auto& s : symbols_) c.add(s.name, s.role);
    return c;
}

bool operator==(const Chart& a, const Chart& b) {
    if (a.symbols_.size() != b.symbols_.size()) return false;
    for (std::size_t i = 0; i < a.symbols_.size(); ++i) {
        if (a.symbols_[i].name != b.symbols_[i].name || a.symbols_[i].role != b.symbols_[i].role) return false;
    }
    return true;
}

} // namespace sigred
