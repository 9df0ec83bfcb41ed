#pragma once

#include "revrank/solve_stats.hpp"
#include "revrank/sparse_chain.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revrank {

/// w = c w M + (1 - c) u for a matrix with row sums at most one.
/// Substochastic rows are accepted; their missing mass simply dissipates.
struct PageRankProblem {
    const SparseChain& matrix;
    double c;
    Distribution restart;

    void validate() const;
};

enum class ScheduleKind {
    PowerIteration,          // synchronous Neumann sweeps
    GaussSeidelCyclic,       // push states 0..n-1 in order
    PrioritizedMaxResidual,  // always push argmax |r| (max-heap)
    RlglMaxC,                // threshold ladder, green states by |r|
    RlglGsd,                 // threshold ladder, green states by |r| / out-degree
};

struct Schedule {
    ScheduleKind kind = ScheduleKind::RlglGsd;
    /// Threshold decay for the RLGL ladder, in (0, 1).
    double threshold_decay = 0.5;
};

std::string_view schedule_name(ScheduleKind kind);
/// Accepts the names produced by schedule_name. Throws DomainError.
ScheduleKind parse_schedule(std::string_view name);
inline constexpr ScheduleKind kAllSchedules[] = {
    ScheduleKind::PowerIteration, ScheduleKind::GaussSeidelCyclic, ScheduleKind::PrioritizedMaxResidual,
    ScheduleKind::RlglMaxC, ScheduleKind::RlglGsd};

/// Reads the PageRank iterate p as another quantity, value(s) = scale(s) p(s) + offset.
/// When present, the stopping rule and the trace use the weighted residual
/// sum_s scale(s) |r(s)| and report the mean of value(s). With the scale
/// produced by the policy-evaluation reductions this is exactly the l1
/// Bellman residual of the implied value function.
struct ResidualView {
    std::vector<double> scale;
    double offset = 0.0;
};

struct PageRankOptions {
    double tol = 1e-10;
    /// 0 means 10^4 * n.
    std::uint64_t max_updates = 0;
    std::optional<ResidualView> view;
    /// Warm start; empty means p = 0. Residuals may then be negative.
    std::vector<double> initial;
};

struct PageRankSolution {
    std::vector<double> w;
    SolveStats stats;
    double residual = 0.0;  // final (weighted) l1 residual
};

/// Residual-push state for w (I - cM) = (1 - c) u.
///
/// Keeps an estimate p and residual r = (1 - c) u - p (I - cM), so that
/// w = p + r (I - cM)^{-1} at all times.
class PushWorkspace {
public:
    PushWorkspace(const PageRankProblem& problem, std::span<const double> initial = {},
                  const ResidualView* view = nullptr);

    /// Coordinate solve at s: p(s) += r(s) / (1 - c M(s,s)), zeroing r(s) and
    /// passing c * delta * M(s, t) to every other out-neighbour t.
    /// on_change(t) is called for every state whose residual moved.
    template <class OnChange>
    void push(std::size_t s, OnChange&& on_change);
    void push(std::size_t s) {
        push(s, [](std::size_t) {});
    }

    /// One power-iteration step: p += r, r = c r M, for every state at once.
    void synchronous_sweep();

    std::span<const double> estimate() const noexcept { return p_; }
    std::span<const double> residual() const noexcept { return r_; }
    double residual_at(std::size_t s) const noexcept { return r_[s]; }

    /// Incrementally maintained weighted residual; may drift slightly.
    double tracked_residual() const noexcept { return tracked_; }
    /// Recomputes sum scale(s) |r(s)| exactly and resynchronises the tracker.
    double exact_residual();
    /// Mean over states of scale(s) p(s) + offset.
    double average_value() const;

    std::uint64_t edges_processed() const noexcept { return edges_; }
    std::uint64_t updates() const noexcept { return updates_; }
    double teleport() const noexcept { return c_; }
    const SparseChain& matrix() const noexcept { return matrix_; }

private:
    void set_residual(std::size_t t, double value) {
        tracked_ += scale_[t] * (std::abs(value) - std::abs(r_[t]));
        r_[t] = value;
    }

    const SparseChain& matrix_;
    double c_;
    std::vector<double> diag_;
    std::vector<double> scale_;
    double offset_ = 0.0;
    std::vector<double> p_;
    std::vector<double> r_;
    double tracked_ = 0.0;
    std::uint64_t edges_ = 0;
    std::uint64_t updates_ = 0;
};

template <class OnChange>
void PushWorkspace::push(std::size_t s, OnChange&& on_change) {
    const double rs = r_[s];
    const auto row = matrix_.row(s);
    edges_ += row.size();
    ++updates_;
    if (rs == 0.0) return;
    const double delta = rs / (1.0 - c_ * diag_[s]);
    p_[s] += delta;
    set_residual(s, 0.0);
    on_change(s);
    const double spread = c_ * delta;
    for (const auto& e : row) {
        if (e.state == s) continue;
        set_residual(e.state, r_[e.state] + spread * e.prob);
        on_change(e.state);
    }
}

/// Solves the PageRank equation with the given schedule. All schedules agree
/// on the answer; they differ in cost. Deterministic for fixed inputs.
/// Throws SolveCapError (with the last iterate and stats) past the update cap.
PageRankSolution solve_pagerank(const PageRankProblem& problem, const Schedule& schedule,
                                const PageRankOptions& options = {});

/// Monte Carlo estimate of w: X_0 ~ u, walk along the (stochastic) matrix for
/// J ~ Geometric(1 - c) steps (J in {0, 1, ...}), record X_J.
Distribution mc_pagerank(const PageRankProblem& problem, std::uint64_t samples, std::uint64_t seed);

} // namespace revrank
