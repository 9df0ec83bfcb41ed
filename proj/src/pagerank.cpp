#include "revrank/pagerank.hpp"

#include "revrank/error.hpp"
#include "revrank/rng.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace revrank {

void PageRankProblem::validate() const {
    if (!(c >= 0.0 && c < 1.0)) throw DomainError("pagerank: teleportation must lie in [0, 1)");
    if (restart.size() != matrix.size()) throw DomainError("pagerank: restart size does not match matrix");
    Distribution::probability(restart.values, 1e-9);
}

std::string_view schedule_name(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::PowerIteration: return "pr-power";
        case ScheduleKind::GaussSeidelCyclic: return "pr-gauss-seidel";
        case ScheduleKind::PrioritizedMaxResidual: return "pr-max-residual";
        case ScheduleKind::RlglMaxC: return "rlgl-maxc";
        case ScheduleKind::RlglGsd: return "rlgl-gsd";
    }
    return "unknown";
}

ScheduleKind parse_schedule(std::string_view name) {
    for (auto kind : kAllSchedules) {
        if (schedule_name(kind) == name) return kind;
    }
    throw DomainError("unknown PageRank schedule '" + std::string(name) + "'");
}

PushWorkspace::PushWorkspace(const PageRankProblem& problem, std::span<const double> initial,
                             const ResidualView* view)
    : matrix_(problem.matrix), c_(problem.c) {
    const std::size_t n = matrix_.size();
    diag_.resize(n);
    for (std::size_t s = 0; s < n; ++s) diag_[s] = matrix_.self_loop(s);

    if (view != nullptr) {
        if (view->scale.size() != n) throw DomainError("pagerank: residual view has the wrong size");
        scale_ = view->scale;
        offset_ = view->offset;
    } else {
        scale_.assign(n, 1.0);
    }

    r_.resize(n);
    for (std::size_t s = 0; s < n; ++s) r_[s] = (1.0 - c_) * problem.restart[s];
    if (initial.empty()) {
        p_.assign(n, 0.0);
    } else {
        if (initial.size() != n) throw DomainError("pagerank: warm start has the wrong size");
        p_.assign(initial.begin(), initial.end());
        // r = (1 - c) u - p + c p M
        for (std::size_t s = 0; s < n; ++s) {
            r_[s] -= p_[s];
            for (const auto& e : matrix_.row(s)) r_[e.state] += c_ * p_[s] * e.prob;
        }
    }
    exact_residual();
}

void PushWorkspace::synchronous_sweep() {
    const std::size_t n = matrix_.size();
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        const double rs = r_[s];
        p_[s] += rs;
        if (rs == 0.0) continue;
        for (const auto& e : matrix_.row(s)) next[e.state] += c_ * rs * e.prob;
    }
    r_ = std::move(next);
    edges_ += matrix_.nnz();
    updates_ += n;
    exact_residual();
}

double PushWorkspace::exact_residual() {
    double total = 0.0;
    for (std::size_t s = 0; s < r_.size(); ++s) total += scale_[s] * std::abs(r_[s]);
    tracked_ = total;
    return total;
}

double PushWorkspace::average_value() const {
    if (p_.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < p_.size(); ++s) total += scale_[s] * p_[s] + offset_;
    return total / static_cast<double>(p_.size());
}

namespace {

struct HeapEntry {
    double priority;
    std::size_t state;
};

// Max priority on top; equal priorities favour the lower index.
struct HeapOrder {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        return a.priority != b.priority ? a.priority < b.priority : a.state > b.state;
    }
};

class Driver {
public:
    Driver(const PageRankProblem& problem, const PageRankOptions& options)
        : ws_(problem, options.initial, options.view ? &*options.view : nullptr),
          tol_(options.tol),
          cap_(options.max_updates != 0 ? options.max_updates
                                        : 10'000ULL * std::max<std::uint64_t>(1, problem.matrix.size())),
          sampler_(problem.matrix.nnz()) {
        stats_.total_edges = problem.matrix.nnz();
        sample();
    }

    PushWorkspace& ws() { return ws_; }

    // Called after each unit of work. True when the solve should stop.
    bool after_work() {
        if (sampler_.due(ws_.edges_processed())) sample();
        if (ws_.updates() >= cap_) capped_ = true;
        return capped_ || (ws_.tracked_residual() <= tol_ && ws_.exact_residual() <= tol_);
    }

    bool converged() { return ws_.exact_residual() <= tol_; }

    PageRankSolution finish(const detail::Stopwatch& clock, std::string_view schedule) {
        const double residual = ws_.exact_residual();
        sample_now(residual);
        stats_.coordinate_updates = ws_.updates();
        stats_.edges_processed = ws_.edges_processed();
        stats_.normalized_iterations = sampler_.normalized(ws_.edges_processed());
        stats_.wall_clock_ms = clock.elapsed_ms();
        std::vector<double> w(ws_.estimate().begin(), ws_.estimate().end());
        if (residual > tol_) {
            stats_.capped = true;
            throw SolveCapError("solve_pagerank(" + std::string(schedule) + "): update cap reached with residual " +
                                    detail::format_residual(residual),
                                residual, std::move(w), std::move(stats_));
        }
        return PageRankSolution{std::move(w), std::move(stats_), residual};
    }

private:
    // Periodic samples are labelled with the grid point just crossed so that
    // traces from different runs line up.
    void sample() {
        sample_now(ws_.exact_residual(), sampler_.grid_point(ws_.edges_processed()));
        sampler_.advance(ws_.edges_processed());
    }

    void sample_now(double residual) { sample_now(residual, sampler_.normalized(ws_.edges_processed())); }

    void sample_now(double residual, double x) {
        auto& trace = stats_.residual_trace;
        if (!trace.empty() && trace.back().normalized_iterations == x) trace.pop_back();
        trace.push_back({x, residual, ws_.average_value()});
    }

    PushWorkspace ws_;
    double tol_;
    std::uint64_t cap_;
    detail::TraceSampler sampler_;
    SolveStats stats_;
    bool capped_ = false;
};

void run_power(Driver& d) {
    while (!d.converged()) {
        d.ws().synchronous_sweep();
        if (d.after_work()) return;
    }
}

void run_cyclic(Driver& d) {
    const std::size_t n = d.ws().matrix().size();
    if (d.converged()) return;
    for (;;) {
        for (std::size_t s = 0; s < n; ++s) {
            d.ws().push(s);
            if (d.after_work()) return;
        }
    }
}

void run_max_residual(Driver& d) {
    auto& ws = d.ws();
    const std::size_t n = ws.matrix().size();
    if (d.converged()) return;

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap;
    auto rebuild = [&] {
        std::vector<HeapEntry> entries;
        entries.reserve(n);
        for (std::size_t s = 0; s < n; ++s) {
            if (ws.residual_at(s) != 0.0) entries.push_back({std::abs(ws.residual_at(s)), s});
        }
        heap = decltype(heap)(HeapOrder{}, std::move(entries));
    };
    rebuild();
    auto on_change = [&](std::size_t t) {
        if (ws.residual_at(t) != 0.0) heap.push({std::abs(ws.residual_at(t)), t});
    };

    while (!heap.empty()) {
        const auto top = heap.top();
        heap.pop();
        if (top.priority != std::abs(ws.residual_at(top.state)) || top.priority == 0.0) continue;  // stale
        ws.push(top.state, on_change);
        if (d.after_work()) return;
        if (heap.size() > 8 * n + 64) rebuild();
    }
}

void run_rlgl(Driver& d, const Schedule& schedule) {
    auto& ws = d.ws();
    const auto& m = ws.matrix();
    const std::size_t n = m.size();
    const bool by_degree = schedule.kind == ScheduleKind::RlglGsd;
    auto priority = [&](std::size_t s) {
        const double mag = std::abs(ws.residual_at(s));
        return by_degree ? mag / static_cast<double>(std::max<std::size_t>(1, m.out_degree(s))) : mag;
    };
    if (d.converged()) return;

    double threshold = 0.0;
    for (std::size_t s = 0; s < n; ++s) threshold = std::max(threshold, priority(s));

    std::vector<HeapEntry> green;
    for (;;) {
        green.clear();
        for (std::size_t s = 0; s < n; ++s) {
            const double p = priority(s);
            if (p > threshold) green.push_back({p, s});
        }
        if (green.empty()) {
            threshold *= schedule.threshold_decay;
            continue;
        }
        std::sort(green.begin(), green.end(), [](const HeapEntry& a, const HeapEntry& b) {
            return a.priority != b.priority ? a.priority > b.priority : a.state < b.state;
        });
        for (const auto& entry : green) {
            if (!(priority(entry.state) > threshold)) continue;
            ws.push(entry.state);
            if (d.after_work()) return;
        }
    }
}

} // namespace

PageRankSolution solve_pagerank(const PageRankProblem& problem, const Schedule& schedule,
                                const PageRankOptions& options) {
    problem.validate();
    if (!(options.tol > 0.0)) throw DomainError("solve_pagerank: tolerance must be positive");
    if (schedule.kind == ScheduleKind::RlglMaxC || schedule.kind == ScheduleKind::RlglGsd) {
        if (!(schedule.threshold_decay > 0.0 && schedule.threshold_decay < 1.0)) {
            throw DomainError("solve_pagerank: threshold decay must lie in (0, 1)");
        }
    }

    detail::Stopwatch clock;
    Driver driver(problem, options);
    switch (schedule.kind) {
        case ScheduleKind::PowerIteration: run_power(driver); break;
        case ScheduleKind::GaussSeidelCyclic: run_cyclic(driver); break;
        case ScheduleKind::PrioritizedMaxResidual: run_max_residual(driver); break;
        case ScheduleKind::RlglMaxC:
        case ScheduleKind::RlglGsd: run_rlgl(driver, schedule); break;
    }
    return driver.finish(clock, schedule_name(schedule.kind));
}

Distribution mc_pagerank(const PageRankProblem& problem, std::uint64_t samples, std::uint64_t seed) {
    problem.validate();
    const auto& m = problem.matrix;
    if (!m.is_stochastic()) throw DomainError("mc_pagerank: matrix must be stochastic");
    const std::size_t n = m.size();

    std::vector<double> restart_cdf(n);
    std::partial_sum(problem.restart.values.begin(), problem.restart.values.end(), restart_cdf.begin());

    // Picks the first index whose cumulative mass exceeds x; the last index
    // absorbs any rounding shortfall.
    auto pick = [](auto begin, auto end, double x, double total) {
        const auto it = std::upper_bound(begin, end, x * total);
        return static_cast<std::size_t>(std::min(it, end - 1) - begin);
    };

    std::vector<double> row_cdf;
    std::vector<std::size_t> row_start(n + 1, 0);
    for (std::size_t s = 0; s < n; ++s) {
        double acc = 0.0;
        for (const auto& e : m.row(s)) row_cdf.push_back(acc += e.prob);
        row_start[s + 1] = row_cdf.size();
    }

    SplitMix64 rng(seed);
    std::vector<double> counts(n, 0.0);
    for (std::uint64_t k = 0; k < samples; ++k) {
        std::size_t x = pick(restart_cdf.begin(), restart_cdf.end(), rng.uniform(), restart_cdf.back());
        while (rng.uniform() < problem.c) {
            const auto b = row_cdf.begin() + static_cast<std::ptrdiff_t>(row_start[x]);
            const auto e = row_cdf.begin() + static_cast<std::ptrdiff_t>(row_start[x + 1]);
            x = m.row(x)[pick(b, e, rng.uniform(), *(e - 1))].state;
        }
        counts[x] += 1.0;
    }
    for (auto& v : counts) v /= static_cast<double>(samples);
    return Distribution{std::move(counts)};
}

} // namespace revrank
