#pragma once

#include "revrank/markov.hpp"
#include "revrank/pagerank.hpp"
#include "revrank/solve_stats.hpp"
#include "revrank/sparse_chain.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revrank {

/// Fixed-policy evaluation problem (I - gamma P) v = r.
struct EvalProblem {
    const SparseChain& chain;
    double gamma;
    std::vector<double> reward;

    /// Stochastic chain, gamma in [0, 1], finite rewards. gamma = 1 additionally
    /// requires every closed class to carry zero reward, and every state to
    /// reach one (see validate_undiscounted).
    void validate() const;
};

/// gamma = 1 is well posed only when every closed class is reward-free
/// (absorbing). Throws DomainError otherwise.
void validate_undiscounted(const SparseChain& chain, std::span<const double> reward);

struct ValueFunction {
    std::vector<double> v;
    double bellman_residual_l1 = 0.0;
};

/// (I - gamma P) v - r, entrywise.
std::vector<double> bellman_residual(const SparseChain& chain, double gamma, std::span<const double> reward,
                                     std::span<const double> v);
double bellman_residual_l1(const SparseChain& chain, double gamma, std::span<const double> reward,
                           std::span<const double> v);

// ---------------------------------------------------------------------------
// Classical Bellman solvers

enum class BellmanSolver { GaussSeidel, PrioritizedSweeping, Jacobi };

std::string_view bellman_solver_name(BellmanSolver solver);
BellmanSolver parse_bellman_solver(std::string_view name);

struct BellmanOptions {
    double tol = 1e-10;           // on the l1 Bellman residual
    std::uint64_t max_updates = 0;  // 0 means 10^4 * n
    std::vector<double> initial;  // empty means v = 0
};

struct BellmanResult {
    ValueFunction value;
    SolveStats stats;
};

/// Coordinate solvers on (I - gamma P) v = r with a maintained residual.
/// A coordinate update at s sets v(s) so that its own residual vanishes
/// and costs in-degree(s) edges. GaussSeidel sweeps states in index order;
/// PrioritizedSweeping always updates argmax |residual| (lowest index on
/// ties); Jacobi updates every state at once.
BellmanResult bellman_direct(const EvalProblem& problem, BellmanSolver solver, const BellmanOptions& options = {});

// ---------------------------------------------------------------------------
// PageRank reductions

struct ClassCertificate {
    std::size_t class_id = 0;
    ClassKind kind = ClassKind::Recurrent;
    std::size_t size = 0;
    double lambda = 1.0;          // Perron value (1 for closed classes)
    double teleportation = 0.0;   // gamma, gamma * lambda, or lambda when undiscounted
    std::vector<double> restart;  // restart distribution (empty when skipped)
    double scaling = 0.0;         // <r'>_weights / (1 - teleportation)
    double shift = 0.0;           // constant added to the class rewards
    bool skipped = false;         // all-zero effective reward, value forced to 0
    bool scalar = false;          // size-1 class handled in closed form
};

struct ReductionCertificate {
    std::vector<ClassCertificate> classes;
};

/// Plain-text per-class report (kind, size, lambda, teleportation, scaling, shift).
std::string explain(const ReductionCertificate& certificate);

struct ReductionOptions {
    Schedule schedule{};
    double tol = 1e-10;                   // target l1 Bellman residual of the output
    SpectralOptions spectral{1e-13, 1'000'000};
    std::uint64_t max_updates = 0;        // per PageRank solve, 0 means 10^4 * n
    /// Known stationary law of an irreducible chain. Verified, not trusted:
    /// its stationarity residual must be within SparseChain::kRowSumTolerance.
    const Distribution* stationary = nullptr;
};

struct ReductionResult {
    ValueFunction value;
    ReductionCertificate certificate;
    /// Summed over every PageRank solve. The trace is only kept when a
    /// single solve produced the answer.
    SolveStats stats;
};

/// Irreducible chain, gamma < 1: v = <r'>_mu / (1 - gamma) * w / mu - shift / (1 - gamma),
/// where w is the PageRank of the time reversal with teleportation gamma and
/// restart r' mu / <r'>_mu. Rewards are shifted to be positive when min r <= 0.
ReductionResult value_via_pagerank_irreducible(const EvalProblem& problem, const ReductionOptions& options = {});

/// Any stochastic chain, gamma < 1. Closed classes are reduced as above;
/// transient classes, in reverse topological order, through their
/// quasi-stationary law and the reversed Doob transform with teleportation
/// gamma * lambda, using the downstream values as extra reward.
ReductionResult value_via_pagerank_general(const EvalProblem& problem, const ReductionOptions& options = {});

/// gamma = 1 with a single irreducible transient class draining into
/// reward-free closed classes. Transient rewards must be nonnegative.
ReductionResult value_undiscounted_absorbing(const EvalProblem& problem, const ReductionOptions& options = {});

// ---------------------------------------------------------------------------
// Duality and Monte Carlo checks

struct AdjointnessReport {
    /// max over trials of |<R f, g>_mu - <f, R* g>_mu|
    double pairing_gap = 0.0;
    /// max over trials of || R*(phi f) - phi(R f) ||_1, phi f = f * mu
    double conjugacy_gap = 0.0;

    double max_deviation() const noexcept { return pairing_gap > conjugacy_gap ? pairing_gap : conjugacy_gap; }
};

/// Random f, g ~ Unif[-1, 1]^n. Forward resolvents are computed with
/// bellman_direct on P, backward resolvents on functions with bellman_direct
/// on P*, and on measures with solve_pagerank on P*.
AdjointnessReport check_resolvent_adjointness(const SparseChain& chain, const Distribution& mu, double gamma,
                                              std::size_t trials, std::uint64_t seed);

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sample mean of sum_{t <= horizon} gamma^t r(X_t) from `start`.
McEstimate mc_value(const EvalProblem& problem, std::size_t start, std::uint64_t samples, std::size_t horizon,
                    std::uint64_t seed);

} // namespace revrank
