// revrank: command-line driver for the sticky-walk experiments.
//
//   revrank evaluate    --graph pa --n 10000 --solver rlgl-gsd --solver bellman-gauss-seidel --out trace.csv
//   revrank policy-iter --graph grid --n 900 --seeds 1,2,3
//   revrank validate    --max-n 50 --seed 7
//   revrank gen-graph   --graph er --n 1000 --seed 3 --out er.txt
//   revrank --config run.ini evaluate      (run.ini: an [evaluate] section of key = value lines)
//
// Exit status: 0 on success, 1 on invalid input, 2 when a solver hit its update cap.

#include "revrank/error.hpp"
#include "revrank/experiment.hpp"
#include "revrank/validate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace revrank;

struct Flags {
    std::string graph = "pa";
    std::string reward = "uniform";
    std::string mode;
    std::string out;
    std::vector<std::string> solvers;
    bool explain = false;
};

void add_experiment_flags(CLI::App& cmd, ExperimentConfig& config, Flags& flags) {
    cmd.add_option("--graph", flags.graph, "Graph kind: pa, er or grid")->capture_default_str();
    cmd.add_option("--n", config.n, "Number of nodes (grid side is round(sqrt(n)))")->capture_default_str();
    cmd.add_option("--m-attach", config.m_attach, "Edges per new node for pa")->capture_default_str();
    cmd.add_option("--er-p", config.er_p, "Edge probability for er (0: 2 ln(n)/n)")->capture_default_str();
    cmd.add_option("--reward", flags.reward, "Reward model: uniform or distance")->capture_default_str();
    cmd.add_option("--gamma", config.gamma, "Discount factor")->capture_default_str();
    cmd.add_option("--kappa", config.kappa, "Stickiness cost coefficient")->capture_default_str();
    cmd.add_option("--alpha-lo", config.alpha_lo, "Lower end of the initial stickiness range")->capture_default_str();
    cmd.add_option("--alpha-hi", config.alpha_hi, "Upper end of the initial stickiness range")->capture_default_str();
    cmd.add_option("--solver", flags.solvers,
                   "Solver, repeatable: pr-power, pr-gauss-seidel, pr-max-residual, rlgl-maxc, rlgl-gsd, "
                   "bellman-gauss-seidel, bellman-prioritized, bellman-jacobi");
    cmd.add_option("--tol", config.tol, "Target l1 Bellman residual")->capture_default_str();
    cmd.add_option("--seeds", config.seeds, "Seed list")->delimiter(',');
    cmd.add_option("--mode", flags.mode, "evaluate or policy-iter (defaults to the subcommand)");
    cmd.add_option("--rounds", config.max_rounds, "Policy-iteration round limit")->capture_default_str();
    cmd.add_option("--max-updates", config.max_updates, "Per-solve update cap (0: 10^4 n)")->capture_default_str();
    cmd.add_option("--threads", config.threads, "Seeds run concurrently")->capture_default_str();
    cmd.add_option("--out", flags.out, "CSV trace path (summary goes to stdout)");
    cmd.add_flag("--explain", flags.explain, "Print the reduction certificate for the first seed");
}

void explain_first_seed(const ExperimentConfig& config) {
    const auto inst = build_instance(config, config.seeds.front());
    const StickyWalkModel model{inst.graph, inst.alpha, inst.beta, config.kappa, config.gamma};
    const auto built = build_chain(model);
    const auto mu = closed_form_stationary(model);
    ReductionOptions options;
    options.tol = config.tol;
    options.stationary = &mu;
    for (const auto& name : config.solvers) {
        const auto e = Evaluator::parse(name);
        if (e.kind == Evaluator::Kind::PageRank) {
            options.schedule = e.schedule;
            break;
        }
    }
    const auto result = value_via_pagerank_irreducible({built.chain, config.gamma, built.reward}, options);
    std::cout << "seed " << config.seeds.front() << ", schedule " << schedule_name(options.schedule.kind) << '\n'
              << explain(result.certificate);
}

int run_experiment_command(ExperimentConfig config, const Flags& flags, ExperimentMode fallback) {
    config.graph = parse_graph_kind(flags.graph);
    config.reward = parse_reward_kind(flags.reward);
    if (!flags.solvers.empty()) config.solvers = flags.solvers;
    if (flags.mode.empty()) {
        config.mode = fallback;
    } else if (flags.mode == "evaluate") {
        config.mode = ExperimentMode::Evaluate;
    } else if (flags.mode == "policy-iter") {
        config.mode = ExperimentMode::PolicyIterate;
    } else {
        throw DomainError("unknown mode '" + flags.mode + "' (expected evaluate or policy-iter)");
    }
    config.validate();

    if (flags.explain) explain_first_seed(config);
    const auto result = run_experiment(config);
    if (!flags.out.empty()) {
        std::ofstream file(flags.out, std::ios::binary);
        if (!file) throw DomainError("cannot open " + flags.out + " for writing");
        write_csv(file, result.rows);
    }
    std::cout << summary_report(config, result);
    return result.any_capped() ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PageRank-based policy evaluation on sticky random walks"};
    app.set_config("--config", "", "key = value configuration file; flags override it");
    app.require_subcommand(1);

    ExperimentConfig eval_config, pi_config;
    Flags eval_flags, pi_flags;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate the initial policy with each solver");
    add_experiment_flags(*evaluate, eval_config, eval_flags);
    auto* policy = app.add_subcommand("policy-iter", "Run policy iteration with each solver as evaluator");
    add_experiment_flags(*policy, pi_config, pi_flags);

    std::size_t max_n = 50, instances = 20;
    std::uint64_t validate_seed = 1;
    auto* validate = app.add_subcommand("validate", "Compare the reductions against dense oracles");
    validate->add_option("--max-n", max_n, "Largest random instance")->capture_default_str();
    validate->add_option("--seed", validate_seed, "Seed")->capture_default_str();
    validate->add_option("--instances", instances, "Instances per check")->capture_default_str();

    std::string gen_kind = "pa", gen_out;
    std::size_t gen_n = 1000, gen_m = 3;
    double gen_p = 0.0;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen-graph", "Write a generated graph as `n m` + `u v` lines");
    gen->add_option("--graph", gen_kind, "pa, er or grid")->capture_default_str();
    gen->add_option("--n", gen_n, "Number of nodes (grid side is round(sqrt(n)))")->capture_default_str();
    gen->add_option("--m-attach", gen_m, "Edges per new node for pa")->capture_default_str();
    gen->add_option("--er-p", gen_p, "Edge probability for er (0: 2 ln(n)/n)")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output path (stdout when empty)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*evaluate) return run_experiment_command(eval_config, eval_flags, ExperimentMode::Evaluate);
        if (*policy) return run_experiment_command(pi_config, pi_flags, ExperimentMode::PolicyIterate);
        if (*validate) {
            const auto report = validate_suite(max_n, validate_seed, instances);
            std::cout << report.to_text();
            return report.passed() ? 0 : 1;
        }
        if (*gen) {
            ExperimentConfig config;
            config.graph = parse_graph_kind(gen_kind);
            config.n = gen_n;
            config.m_attach = gen_m;
            config.er_p = gen_p;
            const auto inst = build_instance(config, gen_seed);
            if (gen_out.empty()) {
                write_graph(std::cout, inst.graph);
            } else {
                std::ofstream file(gen_out, std::ios::binary);
                if (!file) throw DomainError("cannot open " + gen_out + " for writing");
                write_graph(file, inst.graph);
            }
            if (inst.small_component) std::cerr << "warning: largest component below half of the generated nodes\n";
            return 0;
        }
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
