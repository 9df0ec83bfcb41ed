#include "revrank/experiment.hpp"

#include "revrank/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace revrank {

std::string_view graph_kind_name(GraphKind kind) {
    switch (kind) {
        case GraphKind::PreferentialAttachment: return "pa";
        case GraphKind::ErdosRenyi: return "er";
        case GraphKind::Grid: return "grid";
    }
    return "unknown";
}

GraphKind parse_graph_kind(std::string_view name) {
    for (auto kind : {GraphKind::PreferentialAttachment, GraphKind::ErdosRenyi, GraphKind::Grid}) {
        if (graph_kind_name(kind) == name) return kind;
    }
    throw DomainError("unknown graph kind '" + std::string(name) + "' (expected pa, er or grid)");
}

void ExperimentConfig::validate() const {
    if (!(tol > 0.0)) throw DomainError("config: tolerance must be positive");
    if (seeds.empty()) throw DomainError("config: seed list is empty");
    if (solvers.empty()) throw DomainError("config: solver list is empty");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("config: gamma must lie in [0, 1)");
    if (!(kappa >= 0.0)) throw DomainError("config: kappa must be nonnegative");
    if (!(alpha_lo >= 0.0 && alpha_lo <= alpha_hi && alpha_hi <= kAlphaMax)) {
        throw DomainError("config: need 0 <= alpha_lo <= alpha_hi <= 0.95");
    }
    if (n < 4) throw DomainError("config: n must be at least 4");
    if (graph == GraphKind::PreferentialAttachment && n < m_attach + 1) {
        throw DomainError("config: n must exceed m_attach");
    }
    if (er_p < 0.0 || er_p > 1.0) throw DomainError("config: er_p must lie in [0, 1]");
    if (mode == ExperimentMode::PolicyIterate && max_rounds == 0) throw DomainError("config: max_rounds is zero");
    for (const auto& s : solvers) Evaluator::parse(s);
    std::vector<std::string> sorted = solvers;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DomainError("config: solver listed twice");
    }
}

Instance build_instance(const ExperimentConfig& config, std::uint64_t seed) {
    Instance inst;
    switch (config.graph) {
        case GraphKind::PreferentialAttachment:
            inst.graph = pa_graph(config.n, config.m_attach, seed);
            inst.target = max_degree_node(inst.graph);
            break;
        case GraphKind::ErdosRenyi: {
            const double p = config.er_p > 0.0 ? config.er_p : default_er_probability(config.n);
            auto er = er_graph(config.n, p, seed);
            inst.graph = std::move(er.graph);
            inst.small_component = er.small_component;
            inst.target = max_degree_node(inst.graph);
            break;
        }
        case GraphKind::Grid: {
            const auto side = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(config.n)))));
            inst.graph = grid_graph(side, side);
            inst.target = grid_center(side, side);
            break;
        }
    }
    inst.beta = reward_model(inst.graph, config.reward, inst.target, seed);
    inst.alpha = initial_alpha(inst.graph.size(), config.alpha_lo, config.alpha_hi, seed);
    return inst;
}

bool ExperimentResult::any_capped() const {
    return std::any_of(finals.begin(), finals.end(), [](const RunFinal& f) { return f.capped; });
}

namespace {

struct SeedOutput {
    std::vector<TraceRow> rows;
    std::vector<RunFinal> finals;
    bool small_component = false;
};

void append_trace(std::vector<TraceRow>& rows, const TraceRow& base, const SolveStats& stats, double offset) {
    for (const auto& sample : stats.residual_trace) {
        TraceRow row = base;
        row.norm_iters = offset + sample.normalized_iterations;
        row.residual_l1 = sample.residual_l1;
        row.avg_value = sample.average_value;
        rows.push_back(std::move(row));
    }
}

void evaluate_run(const ExperimentConfig& config, const StickyWalkModel& model, const TraceRow& base,
                  const Evaluator& evaluator, SeedOutput& out, RunFinal& final) {
    detail::Stopwatch clock;
    try {
        auto run = evaluate_policy(model, evaluator, config.tol, config.max_updates);
        TraceRow row = base;
        row.wall_ms = run.stats.wall_clock_ms;
        append_trace(out.rows, row, run.stats, 0.0);
        final.v = std::move(run.v);
        final.residual_l1 = run.residual;
        final.norm_iters = run.stats.normalized_iterations;
        final.wall_ms = run.stats.wall_clock_ms;
    } catch (const SolveCapError& e) {
        TraceRow row = base;
        row.wall_ms = clock.elapsed_ms();
        append_trace(out.rows, row, e.stats(), 0.0);
        final.v = e.iterate();
        final.residual_l1 = e.residual();
        final.norm_iters = e.stats().normalized_iterations;
        final.wall_ms = row.wall_ms;
        final.capped = true;
        final.error = e.what();
    } catch (const ConvergenceError& e) {
        final.residual_l1 = e.residual();
        final.wall_ms = clock.elapsed_ms();
        final.capped = true;
        final.error = e.what();
    }
    final.rounds = 0;
    if (!final.v.empty()) {
        final.avg_value = std::accumulate(final.v.begin(), final.v.end(), 0.0) / static_cast<double>(final.v.size());
    }
}

void policy_run(const ExperimentConfig& config, const StickyWalkModel& model, const TraceRow& base,
                const Evaluator& evaluator, SeedOutput& out, RunFinal& final) {
    PolicyIterationOptions options;
    options.evaluator = evaluator;
    options.tol = config.tol;
    options.max_rounds = config.max_rounds;
    options.max_updates = config.max_updates;

    auto emit = [&](const std::vector<PolicyRound>& rounds) {
        double offset = 0.0;
        for (std::size_t k = 0; k < rounds.size(); ++k) {
            TraceRow row = base;
            row.round = k + 1;
            row.wall_ms = rounds[k].stats.wall_clock_ms;
            append_trace(out.rows, row, rounds[k].stats, offset);
            offset += rounds[k].stats.normalized_iterations;
            final.wall_ms += rounds[k].stats.wall_clock_ms;
        }
        final.norm_iters = offset;
        final.rounds = rounds.size();
        if (!rounds.empty()) {
            final.v = rounds.back().v;
            final.avg_value = rounds.back().average_value;
        }
    };
    try {
        auto result = policy_iteration(model, options);
        emit(result.rounds);
        const auto built = build_chain(StickyWalkModel{model.graph, result.rounds.back().alpha, model.beta,
                                                       model.kappa, model.gamma});
        final.residual_l1 = bellman_residual_l1(built.chain, model.gamma, built.reward, final.v);
    } catch (const PolicyIterationError& e) {
        emit(e.rounds());
        final.residual_l1 = e.residual();
        final.capped = true;
        final.error = e.what();
    }
}

SeedOutput run_seed(const ExperimentConfig& config, std::uint64_t seed) {
    SeedOutput out;
    auto inst = build_instance(config, seed);
    out.small_component = inst.small_component;
    StickyWalkModel model{std::move(inst.graph), std::move(inst.alpha), std::move(inst.beta), config.kappa,
                          config.gamma};
    for (const auto& name : config.solvers) {
        const auto evaluator = Evaluator::parse(name);
        TraceRow base;
        base.graph = graph_kind_name(config.graph);
        base.reward = reward_kind_name(config.reward);
        base.solver = name;
        base.seed = seed;
        RunFinal final;
        final.solver = name;
        final.seed = seed;
        if (config.mode == ExperimentMode::Evaluate) {
            evaluate_run(config, model, base, evaluator, out, final);
        } else {
            policy_run(config, model, base, evaluator, out, final);
        }
        out.finals.push_back(std::move(final));
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::size_t count = config.seeds.size();
    std::vector<SeedOutput> outputs(count);

    const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, count);
    if (workers == 1) {
        for (std::size_t k = 0; k < count; ++k) outputs[k] = run_seed(config, config.seeds[k]);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k; (k = next.fetch_add(1)) < count;) {
                    try {
                        outputs[k] = run_seed(config, config.seeds[k]);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Merge in seed order so the output does not depend on scheduling.
    ExperimentResult result;
    for (std::size_t k = 0; k < count; ++k) {
        auto& o = outputs[k];
        result.rows.insert(result.rows.end(), std::make_move_iterator(o.rows.begin()),
                           std::make_move_iterator(o.rows.end()));
        result.finals.insert(result.finals.end(), std::make_move_iterator(o.finals.begin()),
                             std::make_move_iterator(o.finals.end()));
        if (o.small_component) result.small_component_seeds.push_back(config.seeds[k]);
    }
    for (const auto& name : config.solvers) {
        SolverSummary s;
        s.solver = name;
        for (const auto& f : result.finals) {
            if (f.solver != name) continue;
            ++s.runs;
            if (f.capped) ++s.capped;
            s.mean_norm_iters += f.norm_iters;
            s.mean_residual_l1 += f.residual_l1;
            s.mean_avg_value += f.avg_value;
            s.mean_wall_ms += f.wall_ms;
        }
        const auto runs = static_cast<double>(s.runs);
        s.mean_norm_iters /= runs;
        s.mean_residual_l1 /= runs;
        s.mean_avg_value /= runs;
        s.mean_wall_ms /= runs;
        result.summary.push_back(std::move(s));
    }
    return result;
}

void write_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    std::string buf;
    buf.reserve(rows.size() * 96 + 80);
    buf += kCsvHeader;
    buf += '\n';
    char line[512];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%s,%s,%s,%llu,%zu,%.17g,%.17g,%.17g,%.3f\n", r.graph.c_str(),
                      r.reward.c_str(), r.solver.c_str(), static_cast<unsigned long long>(r.seed), r.round,
                      r.norm_iters, r.residual_l1, r.avg_value, r.wall_ms);
        buf += line;
    }
    out << buf;
}

std::string summary_report(const ExperimentConfig& config, const ExperimentResult& result) {
    std::ostringstream out;
    out << "graph=" << graph_kind_name(config.graph) << " n=" << config.n
        << " reward=" << reward_kind_name(config.reward) << " gamma=" << config.gamma << " kappa=" << config.kappa
        << " tol=" << config.tol << " seeds=" << config.seeds.size()
        << " mode=" << (config.mode == ExperimentMode::Evaluate ? "evaluate" : "policy-iter") << '\n';
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %5s %7s %14s %14s %16s %12s\n", "solver", "runs", "capped",
                  "norm_iters", "residual_l1", "avg_value", "wall_ms");
    out << line;
    for (const auto& s : result.summary) {
        std::snprintf(line, sizeof line, "%-22s %5zu %7zu %14.4f %14.3e %16.10f %12.2f%s\n", s.solver.c_str(), s.runs,
                      s.capped, s.mean_norm_iters, s.mean_residual_l1, s.mean_avg_value, s.mean_wall_ms,
                      s.capped > 0 ? "  CAPPED" : "");
        out << line;
    }
    for (const auto& f : result.finals) {
        if (f.capped) out << "capped: solver=" << f.solver << " seed=" << f.seed << ": " << f.error << '\n';
    }
    for (auto seed : result.small_component_seeds) {
        out << "warning: seed " << seed << ": largest component below half of the generated nodes\n";
    }
    return out.str();
}

} // namespace revrank
