#include "revrank/policy_eval.hpp"

#include "revrank/error.hpp"
#include "revrank/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace revrank {
namespace {

constexpr int kRefinements = 16;

double weighted_mean(std::span<const double> f, std::span<const double> weights) {
    double total = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) total += f[s] * weights[s];
    return total;
}

// l1 residual of (I - gamma Q) x = b on one class block.
double local_residual(const SparseChain& q, double gamma, std::span<const double> b, std::span<const double> x) {
    return bellman_residual_l1(q, gamma, b, x);
}

void accumulate(SolveStats& into, const SolveStats& from) {
    into.coordinate_updates += from.coordinate_updates;
    into.edges_processed += from.edges_processed;
    into.wall_clock_ms += from.wall_clock_ms;
    into.capped = into.capped || from.capped;
}

// PageRank solve of one class in "value coordinates": returns
// x = scaling * w / weights where w solves w = c w M + (1 - c) u,
// u = b weights / <b>_weights, for nonnegative b with <b> > 0.
// The residual view makes the stopping rule the l1 residual of
// (I - gamma Q) x = b.
struct ScaledSolve {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<double> restart;
    double scaling = 0.0;
    SolveStats stats;
};

ScaledSolve solve_scaled(const SparseChain& m, double c, std::span<const double> weights, std::span<const double> b,
                         double offset, double tol, const ReductionOptions& options,
                         const std::vector<double>& warm) {
    const std::size_t n = m.size();
    const double mass = weighted_mean(b, weights);
    ScaledSolve out;
    out.scaling = mass / (1.0 - c);
    out.restart.resize(n);
    for (std::size_t s = 0; s < n; ++s) out.restart[s] = b[s] * weights[s] / mass;

    ResidualView view;
    view.scale.resize(n);
    for (std::size_t s = 0; s < n; ++s) view.scale[s] = out.scaling / weights[s];
    view.offset = offset;

    PageRankOptions pr;
    pr.tol = tol;
    pr.max_updates = options.max_updates;
    pr.view = std::move(view);
    pr.initial = warm;

    PageRankProblem problem{m, c, Distribution{out.restart}};
    auto solution = solve_pagerank(problem, options.schedule, pr);
    out.w = std::move(solution.w);
    out.stats = std::move(solution.stats);
    out.x.resize(n);
    for (std::size_t s = 0; s < n; ++s) out.x[s] = out.scaling * out.w[s] / weights[s];
    return out;
}

struct ClassOutcome {
    std::vector<double> x;
    ClassCertificate certificate;
    SolveStats stats;
    bool single_solve = false;
};

// Solves (I - gamma Q) x = b on one communicating class through the
// PageRank representation. `q` is the class block: stochastic for closed
// classes, strictly substochastic for transient ones.
ClassOutcome reduce_class(const SparseChain& q, double gamma, std::span<const double> b, ClassKind kind,
                          double tol, const ReductionOptions& options, const Distribution* known_stationary,
                          bool allow_shift) {
    const std::size_t n = q.size();
    ClassOutcome out;
    auto& cert = out.certificate;
    cert.kind = kind;
    cert.size = n;
    out.stats.total_edges = q.nnz();

    if (std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; })) {
        out.x.assign(n, 0.0);
        cert.skipped = true;
        cert.lambda = kind == ClassKind::Recurrent ? 1.0 : 0.0;  // not computed for skipped transient classes
        cert.teleportation = gamma * cert.lambda;
        return out;
    }

    if (n == 1) {
        const double stay = q.self_loop(0);
        cert.scalar = true;
        cert.lambda = stay;
        cert.teleportation = gamma * stay;
        cert.restart = {1.0};
        if (!(gamma * stay < 1.0)) throw DomainError("evaluation: absorbing state with gamma = 1 carries reward");
        cert.scaling = b[0] / (1.0 - gamma * stay);
        out.x = {cert.scaling};
        return out;
    }

    // Weights (mu or nu), PageRank matrix (P* or reversed Doob) and teleportation.
    Distribution weights;
    SparseChain matrix;
    if (kind == ClassKind::Recurrent) {
        if (known_stationary != nullptr) {
            if (known_stationary->size() != n) throw DomainError("evaluation: supplied stationary law has wrong size");
            const double residual = stationarity_residual(q, *known_stationary);
            if (!(residual <= SparseChain::kRowSumTolerance)) {
                throw DomainError("evaluation: supplied stationary law has residual " + std::to_string(residual));
            }
            weights = *known_stationary;
        } else {
            weights = stationary_distribution(q, options.spectral);
        }
        matrix = time_reversal(q, weights);
        cert.lambda = 1.0;
    } else {
        auto triple = quasi_stationary(q, options.spectral);
        matrix = reversed_doob(q, triple);
        cert.lambda = triple.lambda;
        weights = std::move(triple.nu);
    }
    const double c = gamma * cert.lambda;
    cert.teleportation = c;

    // Nonnegativity shift.
    const double lowest = *std::min_element(b.begin(), b.end());
    double shift = 0.0;
    if (lowest < 0.0) {
        if (!allow_shift) throw DomainError("undiscounted evaluation: transient rewards must be nonnegative");
        shift = -lowest + 1e-6 * (1.0 + std::abs(lowest));
    }
    cert.shift = shift;
    std::vector<double> shifted(b.begin(), b.end());
    for (auto& v : shifted) v += shift;

    // Closed classes: the shift moves the value by exactly shift / (1 - gamma).
    // Transient classes: by shift * (I - gamma Q)^{-1} 1, one extra solve.
    const bool constant_correction = kind == ClassKind::Recurrent;
    const bool needs_correction_solve = shift > 0.0 && !constant_correction;
    const double offset = constant_correction && shift > 0.0 ? -shift / (1.0 - gamma) : 0.0;

    double main_tol = needs_correction_solve ? 0.5 * tol : tol;
    double corr_tol = needs_correction_solve ? 0.5 * tol / shift : 0.0;
    const std::vector<double> ones(n, 1.0);
    std::vector<double> warm_main, warm_corr;
    if (constant_correction && shift > 0.0) {
        // Start from the PageRank iterate that represents v = 0, the same
        // starting point as the direct solvers: x = K p / mu - shift / (1 - gamma)
        // vanishes for p = shift * mu / <b'>_mu.
        const double mass = weighted_mean(shifted, weights.values);
        warm_main.resize(n);
        for (std::size_t s = 0; s < n; ++s) warm_main[s] = shift * weights[s] / mass;
    }
    out.single_solve = !needs_correction_solve;
    for (int attempt = 0; attempt <= kRefinements; ++attempt) {
        const double done = static_cast<double>(out.stats.edges_processed) / static_cast<double>(q.nnz());
        auto main = solve_scaled(matrix, c, weights.values, shifted, offset, main_tol, options, warm_main);
        accumulate(out.stats, main.stats);
        out.x = main.x;
        if (attempt == 0) {
            cert.restart = main.restart;
            cert.scaling = main.scaling;
        }
        // Refinement passes continue the trace where the previous one stopped.
        for (auto sample : main.stats.residual_trace) {
            sample.normalized_iterations += done;
            out.stats.residual_trace.push_back(sample);
        }
        warm_main = std::move(main.w);

        if (constant_correction && shift > 0.0) {
            for (auto& v : out.x) v -= shift / (1.0 - gamma);
        } else if (needs_correction_solve) {
            auto corr = solve_scaled(matrix, c, weights.values, ones, 0.0, corr_tol, options, warm_corr);
            accumulate(out.stats, corr.stats);
            for (std::size_t s = 0; s < n; ++s) out.x[s] -= shift * corr.x[s];
            warm_corr = std::move(corr.w);
        }

        const double residual = local_residual(q, gamma, b, out.x);
        if (residual <= tol) return out;
        // Undoing the shift costs a few ulps per entry, so the recomputed
        // residual can sit slightly above what the solver saw. Tighten by
        // the observed excess.
        const double factor = std::min(0.99, tol / residual);
        main_tol *= factor;
        corr_tol *= factor;
    }
    throw ConvergenceError("evaluation: class residual stays above tolerance after refinement",
                           local_residual(q, gamma, b, out.x));
}

ReductionResult assemble(const EvalProblem& problem, const ClassDecomposition& decomposition,
                         const ReductionOptions& options, bool allow_shift) {
    const auto& chain = problem.chain;
    const std::size_t n = chain.size();
    const std::size_t classes = decomposition.classes.size();
    const double class_tol = options.tol / static_cast<double>(classes);

    ReductionResult result;
    result.value.v.assign(n, 0.0);
    result.certificate.classes.resize(classes);
    result.stats.total_edges = chain.nnz();
    bool single = classes == 1;

    // Reverse topological order: downstream values are final when used.
    for (std::size_t k = classes; k-- > 0;) {
        const auto& cls = decomposition.classes[k];
        std::vector<double> b(cls.states.size());
        for (std::size_t i = 0; i < cls.states.size(); ++i) {
            const auto s = cls.states[i];
            double downstream = 0.0;
            for (const auto& e : chain.row(s)) {
                if (decomposition.class_of[e.state] != k) downstream += e.prob * result.value.v[e.state];
            }
            b[i] = problem.reward[s] + problem.gamma * downstream;
        }
        const auto block = chain.restricted(cls.states);
        const Distribution* known = classes == 1 ? options.stationary : nullptr;
        auto outcome = reduce_class(block, problem.gamma, b, cls.kind, class_tol, options, known, allow_shift);
        for (std::size_t i = 0; i < cls.states.size(); ++i) result.value.v[cls.states[i]] = outcome.x[i];
        outcome.certificate.class_id = k;
        result.certificate.classes[k] = std::move(outcome.certificate);
        accumulate(result.stats, outcome.stats);
        if (single && outcome.single_solve) result.stats.residual_trace = std::move(outcome.stats.residual_trace);
    }
    result.stats.normalized_iterations = static_cast<double>(result.stats.edges_processed) /
                                         static_cast<double>(std::max<std::size_t>(1, chain.nnz()));
    result.value.bellman_residual_l1 = bellman_residual_l1(chain, problem.gamma, problem.reward, result.value.v);
    return result;
}

} // namespace

ReductionResult value_via_pagerank_irreducible(const EvalProblem& problem, const ReductionOptions& options) {
    problem.validate();
    if (!(problem.gamma < 1.0)) throw DomainError("value_via_pagerank_irreducible: requires gamma < 1");
    if (!is_irreducible(problem.chain)) throw DomainError("value_via_pagerank_irreducible: chain is reducible");
    ClassDecomposition single;
    single.class_of.assign(problem.chain.size(), 0);
    CommunicatingClass cls;
    cls.states.resize(problem.chain.size());
    std::iota(cls.states.begin(), cls.states.end(), 0);
    cls.kind = ClassKind::Recurrent;
    single.classes.push_back(std::move(cls));
    return assemble(problem, single, options, true);
}

ReductionResult value_via_pagerank_general(const EvalProblem& problem, const ReductionOptions& options) {
    problem.validate();
    if (!(problem.gamma < 1.0)) throw DomainError("value_via_pagerank_general: requires gamma < 1");
    return assemble(problem, scc_decompose(problem.chain), options, true);
}

ReductionResult value_undiscounted_absorbing(const EvalProblem& problem, const ReductionOptions& options) {
    if (problem.gamma != 1.0) {
        throw DomainError("value_undiscounted_absorbing: gamma < 1, use value_via_pagerank_general instead");
    }
    problem.validate();
    const auto decomposition = scc_decompose(problem.chain);
    if (decomposition.transient_count() > 1) {
        throw DomainError("value_undiscounted_absorbing: more than one transient class; "
                          "evaluate with a discount through value_via_pagerank_general");
    }
    return assemble(problem, decomposition, options, false);
}

std::string explain(const ReductionCertificate& certificate) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "classes: " << certificate.classes.size() << '\n';
    for (const auto& c : certificate.classes) {
        out << "class " << c.class_id << ": kind=" << (c.kind == ClassKind::Recurrent ? "recurrent" : "transient")
            << " size=" << c.size << " lambda=" << c.lambda << " teleportation=" << c.teleportation
            << " scaling=" << c.scaling << " shift=" << c.shift;
        if (c.skipped) out << " skipped=zero-reward";
        if (c.scalar) out << " scalar";
        out << '\n';
    }
    return out.str();
}

namespace {

// R*(m) = m (I - gamma P*)^{-1} for a signed measure m, split into its
// positive and negative parts, each a scaled PageRank problem.
std::vector<double> backward_resolvent_measure(const SparseChain& reversed, double gamma,
                                               std::span<const double> measure, double tol) {
    const std::size_t n = reversed.size();
    std::vector<double> out(n, 0.0);
    for (double sign : {1.0, -1.0}) {
        std::vector<double> part(n);
        for (std::size_t s = 0; s < n; ++s) part[s] = std::max(0.0, sign * measure[s]);
        const double mass = std::accumulate(part.begin(), part.end(), 0.0);
        if (mass == 0.0) continue;
        for (auto& v : part) v /= mass;
        PageRankOptions options;
        options.tol = tol * (1.0 - gamma) / mass;
        PageRankProblem problem{reversed, gamma, Distribution{std::move(part)}};
        const auto solution = solve_pagerank(problem, Schedule{ScheduleKind::PrioritizedMaxResidual}, options);
        for (std::size_t s = 0; s < n; ++s) out[s] += sign * mass / (1.0 - gamma) * solution.w[s];
    }
    return out;
}

} // namespace

AdjointnessReport check_resolvent_adjointness(const SparseChain& chain, const Distribution& mu, double gamma,
                                              std::size_t trials, std::uint64_t seed) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("check_resolvent_adjointness: gamma must lie in [0, 1)");
    const std::size_t n = chain.size();
    const auto reversed = time_reversal(chain, mu);
    constexpr double tol = 1e-11;

    SplitMix64 rng = SplitMix64::stream(seed, 0x6164);
    AdjointnessReport report;
    BellmanOptions bellman;
    bellman.tol = tol;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::vector<double> f(n), g(n);
        for (auto& x : f) x = rng.uniform(-1.0, 1.0);
        for (auto& x : g) x = rng.uniform(-1.0, 1.0);

        const auto forward_f = bellman_direct({chain, gamma, f}, BellmanSolver::GaussSeidel, bellman).value.v;
        const auto backward_g = bellman_direct({reversed, gamma, g}, BellmanSolver::GaussSeidel, bellman).value.v;
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            lhs += forward_f[s] * g[s] * mu[s];
            rhs += f[s] * backward_g[s] * mu[s];
        }
        report.pairing_gap = std::max(report.pairing_gap, std::abs(lhs - rhs));

        std::vector<double> phi_f(n);
        for (std::size_t s = 0; s < n; ++s) phi_f[s] = f[s] * mu[s];
        const auto pushed = backward_resolvent_measure(reversed, gamma, phi_f, tol);
        double gap = 0.0;
        for (std::size_t s = 0; s < n; ++s) gap += std::abs(pushed[s] - forward_f[s] * mu[s]);
        report.conjugacy_gap = std::max(report.conjugacy_gap, gap);
    }
    return report;
}

McEstimate mc_value(const EvalProblem& problem, std::size_t start, std::uint64_t samples, std::size_t horizon,
                    std::uint64_t seed) {
    problem.validate();
    if (!(problem.gamma < 1.0)) throw DomainError("mc_value: requires gamma < 1");
    if (start >= problem.chain.size()) throw DomainError("mc_value: start state out of range");
    if (samples < 2) throw DomainError("mc_value: need at least two samples");
    const auto& chain = problem.chain;

    SplitMix64 rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t k = 0; k < samples; ++k) {
        std::size_t x = start;
        double discount = 1.0, total = 0.0;
        for (std::size_t t = 0; t <= horizon && discount != 0.0; ++t) {
            total += discount * problem.reward[x];
            discount *= problem.gamma;
            if (t == horizon || discount == 0.0) break;
            const double u = rng.uniform() * chain.row_sum(x);
            double acc = 0.0;
            const auto row = chain.row(x);
            std::size_t next = row.back().state;
            for (const auto& e : row) {
                acc += e.prob;
                if (u < acc) {
                    next = e.state;
                    break;
                }
            }
            x = next;
        }
        sum += total;
        sum_sq += total * total;
    }
    const double count = static_cast<double>(samples);
    const double mean = sum / count;
    const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    return McEstimate{mean, std::sqrt(variance / count)};
}

} // namespace revrank
