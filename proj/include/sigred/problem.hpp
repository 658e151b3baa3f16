#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigred/integrate.hpp"
#include "sigred/reduction.hpp"
#include "sigred/symmetry.hpp"

namespace sigred {

/// Malformed problem file. `line` and `column` are 1-based positions in the
/// file when known, 0 otherwise.
class InputError : public Error {
public:
    InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct Theorem4Input {
    DynamicalSystem simplified;
    std::vector<Expr> alphas;
};

struct Problem {
    std::string name;
    std::string description;
    DynamicalSystem sys;
    std::vector<VectorField> fields;
    std::optional<SigmaMatrix> sigma;
    Mode mode = Mode::Strict;
    std::optional<CoordinateChange> change;
    std::vector<Expr> invariants;  // candidate first integrals of the fields
    std::vector<Expr> betas;       // candidate first-order invariants
    std::vector<Expr> constants;   // candidate constants of motion
    std::optional<Theorem4Input> theorem4;
    SampleDomain domain;
    SampleDomain target_domain;  // for the adapted coordinates
    std::optional<State> initial;  // base coordinates in chart order
    double t_end = 1.0;
    double step = 1e-3;
    /// Set when a time-dependent system was rewritten with a clock state.
    std::optional<std::string> clock;
};

/// Parses a problem file. A system whose rhs involves time gains a clock
/// state unless `autonomize` is false, in which case loading fails.
Problem parse_problem(const std::string& text, bool autonomize = true);
Problem load_problem(const std::filesystem::path& path, bool autonomize = true);

/// Problem file content. Parsing the result gives back an equal problem.
nlohmann::ordered_json to_json(const Problem& p);

} // namespace sigred
