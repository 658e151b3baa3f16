#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sigred {

enum class Role { Time, State, Parameter, Jet };

std::string_view role_name(Role role);

struct ChartSymbol {
    std::string name;
    Role role;
    std::string base;  // for jets: the coordinate this is the speed of
};

/// Ordered symbol table. Base coordinates are states followed by parameters;
/// a jet symbol is its base name with a trailing apostrophe.
class Chart {
public:
    Chart() = default;

    /// Chart with an optional time symbol, the given states and parameters, and
    /// (when `with_jets`) one jet coordinate per state and parameter.
    static Chart make(std::optional<std::string> time, const std::vector<std::string>& states,
                      const std::vector<std::string>& parameters = {}, bool with_jets = true);

    static std::string jet_name(std::string_view base) { return std::string(base) + "'"; }

    void add(std::string name, Role role);

    bool has(std::string_view name) const;
    std::optional<Role> role_of(std::string_view name) const;

    const std::vector<ChartSymbol>& symbols() const { return symbols_; }
    const std::optional<std::string>& time() const { return time_; }
    std::vector<std::string> states() const;
    std::vector<std::string> parameters() const;
    /// States then parameters, the coordinates of M.
    std::vector<std::string> base_coordinates() const;
    std::vector<std::string> jets() const;

    std::size_t dimension() const { return base_coordinates().size(); }
    bool is_jet_chart() const;

    /// Same symbols with the jet coordinates dropped.
    Chart base_chart() const;
    /// Same symbols with jets added for every base coordinate that lacks one.
    Chart jet_chart() const;
    /// Same symbols with `name` prepended as the time symbol, if none exists.
    Chart with_time(const std::string& name = "t") const;

    friend bool operator==(const Chart& a, const Chart& b);

private:
    std::vector<ChartSymbol> symbols_;
    std::optional<std::string> time_;
};

} // namespace sigred
