#pragma once

#include "revrank/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace revrank {

struct TraceSample {
    double normalized_iterations = 0.0;
    double residual_l1 = 0.0;
    double average_value = 0.0;
};

/// Cost accounting shared by every iterative solver. One full sweep over
/// all states adds exactly 1.0 to normalized_iterations.
struct SolveStats {
    std::uint64_t coordinate_updates = 0;
    std::uint64_t edges_processed = 0;
    std::uint64_t total_edges = 0;
    double normalized_iterations = 0.0;
    double wall_clock_ms = 0.0;
    /// Sampled each time normalized_iterations crosses a multiple of 0.1,
    /// plus the initial and final states.
    std::vector<TraceSample> residual_trace;
    bool capped = false;
};

/// Update cap reached. Keeps the best iterate and the stats gathered so far.
class SolveCapError : public ConvergenceError {
public:
    SolveCapError(const std::string& what, double residual, std::vector<double> iterate, SolveStats stats)
        : ConvergenceError(what, residual), iterate_(std::move(iterate)), stats_(std::move(stats)) {}

    const std::vector<double>& iterate() const noexcept { return iterate_; }
    const SolveStats& stats() const noexcept { return stats_; }

private:
    std::vector<double> iterate_;
    SolveStats stats_;
};

namespace detail {

inline std::string format_residual(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Emits a trace sample whenever edges cross the next multiple of 0.1 sweeps.
class TraceSampler {
public:
    explicit TraceSampler(std::uint64_t total_edges)
        : total_(total_edges == 0 ? 1 : total_edges), step_(0.1 * static_cast<double>(total_)) {}

    double normalized(std::uint64_t edges) const noexcept {
        return static_cast<double>(edges) / static_cast<double>(total_);
    }

    /// Largest multiple of 0.1 sweeps not exceeding `edges`.
    double grid_point(std::uint64_t edges) const noexcept {
        return std::floor(static_cast<double>(edges) / step_) / 10.0;
    }

    bool due(std::uint64_t edges) const noexcept { return static_cast<double>(edges) >= next_; }

    void advance(std::uint64_t edges) noexcept {
        next_ = (std::floor(static_cast<double>(edges) / step_) + 1.0) * step_;
    }

private:
    std::uint64_t total_;
    double step_;
    double next_ = 0.0;
};

} // namespace detail
} // namespace revrank
