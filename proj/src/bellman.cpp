#include "revrank/error.hpp"
#include "revrank/policy_eval.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace revrank {

void EvalProblem::validate() const {
    if (reward.size() != chain.size()) throw DomainError("evaluation: reward size does not match chain");
    if (!chain.is_stochastic()) throw DomainError("evaluation: chain is not stochastic");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("evaluation: discount must lie in [0, 1]");
    for (double r : reward) {
        if (!std::isfinite(r)) throw DomainError("evaluation: non-finite reward");
    }
    if (gamma == 1.0) validate_undiscounted(chain, reward);
}

void validate_undiscounted(const SparseChain& chain, std::span<const double> reward) {
    const auto decomposition = scc_decompose(chain);
    for (const auto& cls : decomposition.classes) {
        if (cls.kind != ClassKind::Recurrent) continue;
        for (auto s : cls.states) {
            if (reward[s] != 0.0) {
                throw DomainError("undiscounted evaluation: closed class containing state " + std::to_string(s) +
                                  " has nonzero reward");
            }
        }
    }
}

std::vector<double> bellman_residual(const SparseChain& chain, double gamma, std::span<const double> reward,
                                     std::span<const double> v) {
    std::vector<double> out(chain.size());
    for (std::size_t s = 0; s < chain.size(); ++s) {
        double acc = 0.0;
        for (const auto& e : chain.row(s)) acc += e.prob * v[e.state];
        out[s] = v[s] - gamma * acc - reward[s];
    }
    return out;
}

double bellman_residual_l1(const SparseChain& chain, double gamma, std::span<const double> reward,
                           std::span<const double> v) {
    double total = 0.0;
    for (double x : bellman_residual(chain, gamma, reward, v)) total += std::abs(x);
    return total;
}

std::string_view bellman_solver_name(BellmanSolver solver) {
    switch (solver) {
        case BellmanSolver::GaussSeidel: return "bellman-gauss-seidel";
        case BellmanSolver::PrioritizedSweeping: return "bellman-prioritized";
        case BellmanSolver::Jacobi: return "bellman-jacobi";
    }
    return "unknown";
}

BellmanSolver parse_bellman_solver(std::string_view name) {
    for (auto s : {BellmanSolver::GaussSeidel, BellmanSolver::PrioritizedSweeping, BellmanSolver::Jacobi}) {
        if (bellman_solver_name(s) == name) return s;
    }
    throw DomainError("unknown Bellman solver '" + std::string(name) + "'");
}

namespace {

// Residual convention here is res = r - (I - gamma P) v, so an update
// v(s) += res(s) / (1 - gamma P(s,s)) zeroes res(s).
class BellmanState {
public:
    BellmanState(const EvalProblem& problem, std::span<const double> initial)
        : chain_(problem.chain), gamma_(problem.gamma), reward_(problem.reward) {
        const std::size_t n = chain_.size();
        diag_.resize(n);
        for (std::size_t s = 0; s < n; ++s) diag_[s] = 1.0 - gamma_ * chain_.self_loop(s);
        if (initial.empty()) {
            v_.assign(n, 0.0);
        } else {
            if (initial.size() != n) throw DomainError("bellman: warm start has the wrong size");
            v_.assign(initial.begin(), initial.end());
        }
        recompute();
    }

    template <class OnChange>
    void update(std::size_t s, OnChange&& on_change) {
        edges_ += chain_.in_degree(s);
        ++updates_;
        const double rs = res_[s];
        if (rs == 0.0 || diag_[s] <= 0.0) return;
        const double delta = rs / diag_[s];
        v_[s] += delta;
        set(s, 0.0);
        on_change(s);
        for (const auto& e : chain_.column(s)) {
            if (e.state == s) continue;
            set(e.state, res_[e.state] + gamma_ * e.prob * delta);
            on_change(e.state);
        }
    }

    void jacobi_sweep() {
        const std::size_t n = chain_.size();
        for (std::size_t s = 0; s < n; ++s) {
            if (diag_[s] > 0.0) v_[s] += res_[s] / diag_[s];
        }
        edges_ += chain_.nnz();
        updates_ += n;
        recompute();
    }

    double recompute() {
        res_ = bellman_residual(chain_, gamma_, reward_, v_);
        tracked_ = 0.0;
        for (auto& x : res_) {
            x = -x;
            tracked_ += std::abs(x);
        }
        return tracked_;
    }

    double exact() {
        tracked_ = 0.0;
        for (double x : res_) tracked_ += std::abs(x);
        return tracked_;
    }

    double average() const {
        double total = 0.0;
        for (double x : v_) total += x;
        return v_.empty() ? 0.0 : total / static_cast<double>(v_.size());
    }

    double tracked() const noexcept { return tracked_; }
    double res(std::size_t s) const noexcept { return res_[s]; }
    std::uint64_t edges() const noexcept { return edges_; }
    std::uint64_t updates() const noexcept { return updates_; }
    const std::vector<double>& v() const noexcept { return v_; }

private:
    void set(std::size_t t, double value) {
        tracked_ += std::abs(value) - std::abs(res_[t]);
        res_[t] = value;
    }

    const SparseChain& chain_;
    double gamma_;
    std::span<const double> reward_;
    std::vector<double> diag_;
    std::vector<double> v_;
    std::vector<double> res_;
    double tracked_ = 0.0;
    std::uint64_t edges_ = 0;
    std::uint64_t updates_ = 0;
};

struct HeapEntry {
    double priority;
    std::size_t state;
};

struct HeapOrder {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        return a.priority != b.priority ? a.priority < b.priority : a.state > b.state;
    }
};

} // namespace

BellmanResult bellman_direct(const EvalProblem& problem, BellmanSolver solver, const BellmanOptions& options) {
    problem.validate();
    if (!(options.tol > 0.0)) throw DomainError("bellman_direct: tolerance must be positive");
    detail::Stopwatch clock;
    const auto& chain = problem.chain;
    const std::size_t n = chain.size();
    const std::uint64_t cap =
        options.max_updates != 0 ? options.max_updates : 10'000ULL * std::max<std::uint64_t>(1, n);

    BellmanState state(problem, options.initial);
    SolveStats stats;
    stats.total_edges = chain.nnz();
    detail::TraceSampler sampler(chain.nnz());
    auto record = [&](double residual, double x) {
        if (!stats.residual_trace.empty() && stats.residual_trace.back().normalized_iterations == x) {
            stats.residual_trace.pop_back();
        }
        stats.residual_trace.push_back({x, residual, state.average()});
    };
    record(state.exact(), 0.0);
    sampler.advance(0);

    bool capped = false;
    auto after_work = [&] {
        if (sampler.due(state.edges())) {
            record(state.exact(), sampler.grid_point(state.edges()));
            sampler.advance(state.edges());
        }
        if (state.updates() >= cap) capped = true;
        return capped || (state.tracked() <= options.tol && state.exact() <= options.tol);
    };
    auto noop = [](std::size_t) {};
    std::size_t cursor = 0;

    // The maintained residual can drift from a fresh recomputation by
    // rounding, so the loop only ends on the recomputed value.
    while (!capped && state.recompute() > options.tol) {
        switch (solver) {
            case BellmanSolver::GaussSeidel: {
                // The sweep resumes where it stopped; restarting at state 0
                // after every recomputation can starve the tail states.
                bool done = false;
                while (!done) {
                    state.update(cursor, noop);
                    cursor = cursor + 1 == n ? 0 : cursor + 1;
                    done = after_work();
                }
                break;
            }
            case BellmanSolver::Jacobi:
                do {
                    state.jacobi_sweep();
                } while (!after_work());
                break;
            case BellmanSolver::PrioritizedSweeping: {
                std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap;
                auto rebuild = [&] {
                    std::vector<HeapEntry> entries;
                    for (std::size_t s = 0; s < n; ++s) {
                        if (state.res(s) != 0.0) entries.push_back({std::abs(state.res(s)), s});
                    }
                    heap = decltype(heap)(HeapOrder{}, std::move(entries));
                };
                rebuild();
                auto on_change = [&](std::size_t t) {
                    if (state.res(t) != 0.0) heap.push({std::abs(state.res(t)), t});
                };
                while (!heap.empty()) {
                    const auto top = heap.top();
                    heap.pop();
                    if (top.priority == 0.0 || top.priority != std::abs(state.res(top.state))) continue;
                    state.update(top.state, on_change);
                    if (after_work()) break;
                    if (heap.size() > 8 * n + 64) rebuild();
                }
                break;
            }
        }
    }

    const double residual = state.recompute();
    record(residual, sampler.normalized(state.edges()));
    stats.coordinate_updates = state.updates();
    stats.edges_processed = state.edges();
    stats.normalized_iterations = sampler.normalized(state.edges());
    stats.wall_clock_ms = clock.elapsed_ms();
    if (residual > options.tol) {
        stats.capped = true;
        throw SolveCapError("bellman_direct(" + std::string(bellman_solver_name(solver)) +
                                "): update cap reached with residual " + detail::format_residual(residual),
                            residual, state.v(), std::move(stats));
    }
    return BellmanResult{ValueFunction{state.v(), residual}, std::move(stats)};
}

} // namespace revrank
