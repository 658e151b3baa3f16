#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sigred/jet.hpp"
#include "sigred/reduction.hpp"

namespace sigred {

class BlowUp : public Error {
public:
    using Error::Error;
};

using State = std::vector<double>;

/// Uniform grid and one state row per grid point. Columns follow `symbols`.
struct Trajectory {
    std::vector<std::string> symbols;
    double step = 0.0;
    std::vector<double> times;
    std::vector<State> rows;
    bool blow_up = false;  // integration stopped at a non-finite state

    std::size_t column(std::string_view symbol) const;
    /// Linear interpolation of every column at time t inside the grid.
    State at(double t) const;
};

/// Classical RK4 with fixed step t_end / ceil(t_end / h). States are ordered
/// as the chart's base coordinates; parameters are held at their initial
/// values with zero speed. Stops at the first non-finite stage and sets
/// `blow_up`. Throws Error when the rhs depends on time.
Trajectory integrate(const DynamicalSystem& sys, const State& x0, double t_end, double h);

/// Integrates ẏⱼ = gⱼ(z(t), y) along a frozen solution z of the reduced
/// system, interpolated linearly in t. `fixed` binds any further symbols
/// (parameters held constant); parameter jets are bound to zero.
Trajectory reconstruct_along(const Trajectory& reduced, const std::vector<ReducedEquation>& reconstruction,
                             const State& y0, double h, const Point& fixed = {});

/// Largest deviation between the invariant images of the full flow and the
/// flow of the reduced system started at the image of x0. Throws BlowUp.
double flow_consistency(const DynamicalSystem& full, const CoordinateChange& change, const DynamicalSystem& reduced,
                        const State& x0, double t_end, double h);

/// max |I(x(t)) − I(x(0))| / (1 + |I(x(0))|) over the grid.
double invariant_drift(const Expr& invariant, const Trajectory& traj);

/// Header "t,<symbols>", then one row per grid point with 17 significant
/// digits.
void write_csv(const Trajectory& traj, std::ostream& os);
void write_csv(const Trajectory& traj, const std::filesystem::path& path);

} // namespace sigred
