#pragma once

#include "revrank/error.hpp"
#include "revrank/pagerank.hpp"
#include "revrank/policy_eval.hpp"
#include "revrank/solve_stats.hpp"
#include "revrank/sparse_chain.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace revrank {

/// Simple undirected graph with sorted adjacency lists.
class UndirectedGraph {
public:
    UndirectedGraph() = default;
    /// Rejects self-loops, repeated edges and out-of-range endpoints.
    UndirectedGraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

    std::size_t size() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edges_; }
    std::size_t degree(std::size_t x) const noexcept { return adjacency_[x].size(); }
    std::span<const std::size_t> neighbors(std::size_t x) const noexcept { return adjacency_[x]; }
    bool is_connected() const;

    /// Each edge once, as (u, v) with u < v, in lexicographic order.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    std::vector<std::vector<std::size_t>> adjacency_;
    std::size_t edges_ = 0;
};

/// Text format: "n m" header, then one "u v" line per edge.
UndirectedGraph read_graph(std::istream& in);
void write_graph(std::ostream& out, const UndirectedGraph& graph);

/// Preferential attachment: starts from the complete graph on m_attach + 1
/// nodes; each further node links to m_attach distinct existing nodes drawn
/// with probability proportional to degree.
UndirectedGraph pa_graph(std::size_t n, std::size_t m_attach, std::uint64_t seed);

struct ErGraph {
    UndirectedGraph graph;         // largest connected component, reindexed
    std::size_t generated_n = 0;
    bool small_component = false;  // component below half of generated_n
};

/// G(n, p), restricted to its largest connected component (ties go to the
/// component holding the lowest node). Node order is preserved.
ErGraph er_graph(std::size_t n, double p, std::uint64_t seed);
double default_er_probability(std::size_t n);

/// w x h four-neighbour lattice; node (x, y) has index y * w + x.
UndirectedGraph grid_graph(std::size_t w, std::size_t h);
std::size_t grid_center(std::size_t w, std::size_t h);
/// Maximum-degree node, lowest index on ties.
std::size_t max_degree_node(const UndirectedGraph& graph);

/// Shortest-path distances from `source`; unreachable nodes get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const UndirectedGraph& graph, std::size_t source);

inline constexpr double kAlphaMax = 0.95;

/// Stay cost kappa * alpha / (1 - alpha).
double stickiness_cost(double kappa, double alpha);

struct StickyWalkModel {
    UndirectedGraph graph;
    std::vector<double> alpha;  // in [0, kAlphaMax]
    std::vector<double> beta;   // state rewards, nonnegative
    double kappa = 0.1;
    double gamma = 0.9;

    void validate() const;
};

struct StickyChain {
    SparseChain chain;
    std::vector<double> reward;
};

/// P(x, x) = alpha_x, P(x, y) = (1 - alpha_x) / d_x for each neighbour y,
/// r_x = beta_x - kappa alpha_x / (1 - alpha_x).
StickyChain build_chain(const StickyWalkModel& model);

/// mu(x) proportional to d_x / (1 - alpha_x).
Distribution closed_form_stationary(const StickyWalkModel& model);

enum class RewardKind { UniformRandom, DistanceToTarget };

std::string_view reward_kind_name(RewardKind kind);
RewardKind parse_reward_kind(std::string_view name);

/// UniformRandom: beta_x ~ Unif[0, 1) from the seed (target ignored).
/// DistanceToTarget: beta_x = 1 / (dist(x, target) + 1) (seed ignored).
std::vector<double> reward_model(const UndirectedGraph& graph, RewardKind kind, std::size_t target,
                                 std::uint64_t seed);

/// alpha_x ~ Unif[lo, hi) from the seed.
std::vector<double> initial_alpha(std::size_t n, double lo, double hi, std::uint64_t seed);

/// Greedy improvement against v: alpha_x maximises
/// beta_x - kappa a / (1 - a) + gamma (a v(x) + (1 - a) vbar_x) over [0, kAlphaMax],
/// vbar_x the neighbour mean of v. With D = v(x) - vbar_x the maximiser is
/// 1 - sqrt(kappa / (gamma D)) clipped to [0, kAlphaMax] when D > kappa / gamma,
/// and 0 otherwise.
std::vector<double> improve_policy(const StickyWalkModel& model, std::span<const double> v);

struct Evaluator {
    enum class Kind { PageRank, Bellman } kind = Kind::PageRank;
    Schedule schedule{};
    BellmanSolver bellman = BellmanSolver::GaussSeidel;

    std::string name() const;
    /// Accepts any schedule_name or bellman_solver_name.
    static Evaluator parse(std::string_view name);
};

struct EvaluationRun {
    std::vector<double> v;
    double residual = 0.0;
    SolveStats stats;
};

/// Evaluates the current policy. The PageRank route uses the closed-form
/// stationary law (verified) so a single PageRank solve is needed.
EvaluationRun evaluate_policy(const StickyWalkModel& model, const Evaluator& evaluator, double tol,
                              std::uint64_t max_updates = 0);

struct PolicyRound {
    std::vector<double> alpha;  // policy evaluated in this round
    std::vector<double> v;
    double average_value = 0.0;
    SolveStats stats;
};

struct PolicyIterationOptions {
    Evaluator evaluator{};
    double tol = 1e-10;
    std::size_t max_rounds = 50;
    double alpha_tol = 1e-8;  // stop when the l-infinity policy change is below this
    std::uint64_t max_updates = 0;
};

struct PolicyIterationResult {
    std::vector<PolicyRound> rounds;
    std::vector<double> alpha;  // final policy (after the last improvement)
    bool converged = false;
};

/// Thrown when an evaluation gives up; carries the rounds completed so far.
class PolicyIterationError : public ConvergenceError {
public:
    PolicyIterationError(const ConvergenceError& cause, std::vector<PolicyRound> rounds)
        : ConvergenceError(cause.what(), cause.residual()), rounds_(std::move(rounds)) {}
    const std::vector<PolicyRound>& rounds() const noexcept { return rounds_; }

private:
    std::vector<PolicyRound> rounds_;
};

PolicyIterationResult policy_iteration(StickyWalkModel model, const PolicyIterationOptions& options = {});

} // namespace revrank
