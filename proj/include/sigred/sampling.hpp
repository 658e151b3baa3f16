#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sigred/expr.hpp"

namespace sigred {

/// xorshift64* generator. The exact recurrence is part of the public
/// contract: verdicts must be reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

    std::uint64_t next() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 2685821657736338717ULL;
    }
    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

private:
    std::uint64_t state_;
};

struct Interval {
    double lo = 0.2;
    double hi = 1.2;
};

struct SampleDomain {
    std::map<std::string, Interval, std::less<>> bounds;  // per-symbol overrides
    Interval fallback{};
    std::size_t count = 64;
    double tolerance = 1e-9;
    std::uint64_t seed = 0xC1C0DE;
    double guard = 1e-6;
    std::size_t budget = 0;  // 0 means 10 * count

    Interval bounds_for(std::string_view name) const;
    std::size_t max_draws() const { return budget ? budget : 10 * count; }
    /// Throws Error when an interval is empty or non-finite, or count < 8.
    void validate() const;
    SampleDomain with_seed(std::uint64_t s) const {
        SampleDomain d = *this;
        d.seed = s;
        return d;
    }
};

/// Draws `domain.count` points binding every free symbol of `exprs` plus
/// `extra`. A draw is rejected when any expression fails to evaluate to a
/// finite value or any singular guard is smaller than `domain.guard` in
/// magnitude. Throws InsufficientSamples when the budget runs out.
std::vector<Point> sample_points(const SampleDomain& domain, std::span<const Expr> exprs,
                                 const std::set<std::string>& extra = {});

struct Comparison {
    bool equal = false;
    double residual = 0.0;  // max |a - b| / (1 + |a|) over accepted points
    std::size_t points = 0;
    bool exact = false;  // decided by comparing expanded polynomials
};

Comparison equals_numeric(const Expr& a, const Expr& b, const SampleDomain& domain = {});

/// Same as equals_numeric(e, 0).
Comparison is_zero_numeric(const Expr& e, const SampleDomain& domain = {});

} // namespace sigred
