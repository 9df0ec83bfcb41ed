#pragma once

#include "revrank/sticky_walk.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace revrank {

enum class GraphKind { PreferentialAttachment, ErdosRenyi, Grid };

std::string_view graph_kind_name(GraphKind kind);  // "pa", "er", "grid"
GraphKind parse_graph_kind(std::string_view name);

enum class ExperimentMode { Evaluate, PolicyIterate };

struct ExperimentConfig {
    GraphKind graph = GraphKind::PreferentialAttachment;
    std::size_t n = 10'000;     // grid side is round(sqrt(n))
    std::size_t m_attach = 3;
    double er_p = 0.0;          // 0 means 2 ln(n) / n
    RewardKind reward = RewardKind::UniformRandom;
    double gamma = 0.9;
    double kappa = 0.1;
    double alpha_lo = 0.1;
    double alpha_hi = 0.9;
    std::vector<std::string> solvers{"pr-power",          "pr-gauss-seidel", "pr-max-residual",    "rlgl-maxc",
                                     "rlgl-gsd",          "bellman-gauss-seidel", "bellman-prioritized"};
    double tol = 1e-10;
    std::vector<std::uint64_t> seeds{1,  2,  3,  4,  5,  6,  7,  8,  9,  10,
                                     11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    ExperimentMode mode = ExperimentMode::Evaluate;
    std::size_t max_rounds = 20;    // policy iteration only
    std::uint64_t max_updates = 0;  // per solve, 0 means 10^4 * n
    std::size_t threads = 1;        // seeds run concurrently when > 1

    /// Throws DomainError on an invalid configuration.
    void validate() const;
};

struct Instance {
    UndirectedGraph graph;
    std::size_t target = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    bool small_component = false;
};

/// Graph, target, rewards and initial policy for one seed.
Instance build_instance(const ExperimentConfig& config, std::uint64_t seed);

struct TraceRow {
    std::string graph;
    std::string reward;
    std::string solver;
    std::uint64_t seed = 0;
    std::size_t round = 0;  // policy-iteration round (from 1), 0 in Evaluate mode
    double norm_iters = 0.0;
    double residual_l1 = 0.0;
    double avg_value = 0.0;
    double wall_ms = 0.0;
};

struct RunFinal {
    std::string solver;
    std::uint64_t seed = 0;
    std::vector<double> v;
    double residual_l1 = 0.0;
    double norm_iters = 0.0;
    double avg_value = 0.0;
    double wall_ms = 0.0;
    std::size_t rounds = 0;
    bool capped = false;
    std::string error;  // message when capped
};

struct SolverSummary {
    std::string solver;
    std::size_t runs = 0;
    std::size_t capped = 0;
    double mean_norm_iters = 0.0;
    double mean_residual_l1 = 0.0;
    double mean_avg_value = 0.0;
    double mean_wall_ms = 0.0;
};

struct ExperimentResult {
    std::vector<TraceRow> rows;    // ordered by seed, then solver (config order), then trace
    std::vector<RunFinal> finals;  // same order, one per (seed, solver)
    std::vector<SolverSummary> summary;
    std::vector<std::uint64_t> small_component_seeds;

    bool any_capped() const;
};

/// In PolicyIterate mode norm_iters accumulates across rounds.
ExperimentResult run_experiment(const ExperimentConfig& config);

inline constexpr std::string_view kCsvHeader = "graph,reward,solver,seed,round,norm_iters,residual_l1,avg_value,wall_ms";

void write_csv(std::ostream& out, const std::vector<TraceRow>& rows);
std::string summary_report(const ExperimentConfig& config, const ExperimentResult& result);

} // namespace revrank
