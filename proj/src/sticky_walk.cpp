#include "revrank/sticky_walk.hpp"

#include "revrank/markov.hpp"
#include "revrank/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

namespace revrank {

UndirectedGraph::UndirectedGraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : adjacency_(n), edges_(edges.size()) {
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) throw DomainError("graph: edge endpoint out of range");
        if (u == v) throw DomainError("graph: self-loop at node " + std::to_string(u));
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (std::size_t x = 0; x < n; ++x) {
        auto& list = adjacency_[x];
        std::sort(list.begin(), list.end());
        if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
            throw DomainError("graph: repeated edge at node " + std::to_string(x));
        }
    }
}

bool UndirectedGraph::is_connected() const {
    if (size() == 0) return true;
    const auto dist = bfs_distances(*this, 0);
    return std::none_of(dist.begin(), dist.end(),
                        [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
}

std::vector<std::pair<std::size_t, std::size_t>> UndirectedGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edges_);
    for (std::size_t u = 0; u < size(); ++u) {
        for (auto v : adjacency_[u]) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

UndirectedGraph read_graph(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw DomainError("graph file: missing `n m` header");
    std::vector<std::pair<std::size_t, std::size_t>> edges(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (!(in >> edges[k].first >> edges[k].second)) {
            throw DomainError("graph file: expected " + std::to_string(m) + " edges, read " + std::to_string(k));
        }
    }
    return UndirectedGraph(n, edges);
}

void write_graph(std::ostream& out, const UndirectedGraph& graph) {
    std::ostringstream buf;
    buf << graph.size() << ' ' << graph.edge_count() << '\n';
    for (const auto& [u, v] : graph.edges()) buf << u << ' ' << v << '\n';
    out << buf.str();
}

UndirectedGraph pa_graph(std::size_t n, std::size_t m_attach, std::uint64_t seed) {
    if (m_attach == 0) throw DomainError("pa_graph: m_attach must be positive");
    if (n < m_attach + 1) throw DomainError("pa_graph: need n >= m_attach + 1");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    // Every edge endpoint once; a uniform pick is a degree-proportional pick.
    std::vector<std::size_t> endpoints;
    for (std::size_t u = 0; u <= m_attach; ++u) {
        for (std::size_t v = u + 1; v <= m_attach; ++v) {
            edges.emplace_back(u, v);
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }
    SplitMix64 rng = SplitMix64::stream(seed, 0x5041);
    std::vector<std::size_t> chosen;
    for (std::size_t x = m_attach + 1; x < n; ++x) {
        chosen.clear();
        while (chosen.size() < m_attach) {
            const auto t = endpoints[rng.below(endpoints.size())];
            if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
        }
        for (auto t : chosen) {
            edges.emplace_back(t, x);
            endpoints.push_back(t);
            endpoints.push_back(x);
        }
    }
    return UndirectedGraph(n, edges);
}

double default_er_probability(std::size_t n) {
    return n < 3 ? 1.0 : std::min(1.0, 2.0 * std::log(static_cast<double>(n)) / static_cast<double>(n));
}

ErGraph er_graph(std::size_t n, double p, std::uint64_t seed) {
    if (n == 0) throw DomainError("er_graph: n must be positive");
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("er_graph: p must lie in (0, 1]");
    SplitMix64 rng = SplitMix64::stream(seed, 0x4552);

    // Geometric skipping over the pairs (v, w), w < v.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    if (p == 1.0) {
        for (std::size_t v = 1; v < n; ++v) {
            for (std::size_t w = 0; w < v; ++w) edges.emplace_back(w, v);
        }
    } else {
        const double log_q = std::log1p(-p);
        std::size_t v = 1;
        std::int64_t w = -1;
        while (v < n) {
            const double skip = std::floor(std::log1p(-rng.uniform()) / log_q);
            w += 1 + static_cast<std::int64_t>(std::min(skip, 1e18));
            while (v < n && w >= static_cast<std::int64_t>(v)) {
                w -= static_cast<std::int64_t>(v);
                ++v;
            }
            if (v < n) edges.emplace_back(static_cast<std::size_t>(w), v);
        }
    }
    const UndirectedGraph full(n, edges);

    // Largest component; ties go to the one found first (lowest node).
    std::vector<std::size_t> component(n, std::numeric_limits<std::size_t>::max());
    std::size_t best = 0, best_size = 0, count = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (component[s] != std::numeric_limits<std::size_t>::max()) continue;
        std::size_t size = 0;
        std::vector<std::size_t> stack{s};
        component[s] = count;
        while (!stack.empty()) {
            const auto x = stack.back();
            stack.pop_back();
            ++size;
            for (auto y : full.neighbors(x)) {
                if (component[y] == std::numeric_limits<std::size_t>::max()) {
                    component[y] = count;
                    stack.push_back(y);
                }
            }
        }
        if (size > best_size) {
            best = count;
            best_size = size;
        }
        ++count;
    }
    std::vector<std::size_t> index(n, 0);
    std::size_t kept = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (component[s] == best) index[s] = kept++;
    }
    std::vector<std::pair<std::size_t, std::size_t>> kept_edges;
    for (const auto& [u, v] : edges) {
        if (component[u] == best) kept_edges.emplace_back(index[u], index[v]);
    }
    ErGraph out;
    out.graph = UndirectedGraph(kept, kept_edges);
    out.generated_n = n;
    out.small_component = 2 * kept < n;
    return out;
}

UndirectedGraph grid_graph(std::size_t w, std::size_t h) {
    if (w < 2 || h < 2) throw DomainError("grid_graph: both sides must be at least 2");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t s = y * w + x;
            if (x + 1 < w) edges.emplace_back(s, s + 1);
            if (y + 1 < h) edges.emplace_back(s, s + w);
        }
    }
    return UndirectedGraph(w * h, edges);
}

std::size_t grid_center(std::size_t w, std::size_t h) { return (h / 2) * w + w / 2; }

std::size_t max_degree_node(const UndirectedGraph& graph) {
    if (graph.size() == 0) throw DomainError("max_degree_node: empty graph");
    std::size_t best = 0;
    for (std::size_t x = 1; x < graph.size(); ++x) {
        if (graph.degree(x) > graph.degree(best)) best = x;
    }
    return best;
}

std::vector<std::size_t> bfs_distances(const UndirectedGraph& graph, std::size_t source) {
    if (source >= graph.size()) throw DomainError("bfs_distances: source out of range");
    std::vector<std::size_t> dist(graph.size(), std::numeric_limits<std::size_t>::max());
    std::queue<std::size_t> queue;
    dist[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
        const auto x = queue.front();
        queue.pop();
        for (auto y : graph.neighbors(x)) {
            if (dist[y] == std::numeric_limits<std::size_t>::max()) {
                dist[y] = dist[x] + 1;
                queue.push(y);
            }
        }
    }
    return dist;
}

double stickiness_cost(double kappa, double alpha) { return kappa * alpha / (1.0 - alpha); }

void StickyWalkModel::validate() const {
    const std::size_t n = graph.size();
    if (n == 0) throw DomainError("sticky walk: empty graph");
    if (alpha.size() != n || beta.size() != n) throw DomainError("sticky walk: alpha/beta size mismatch");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("sticky walk: kappa must be nonnegative");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("sticky walk: gamma must lie in [0, 1)");
    for (std::size_t x = 0; x < n; ++x) {
        if (graph.degree(x) == 0) throw DomainError("sticky walk: isolated node " + std::to_string(x));
        if (!(alpha[x] >= 0.0 && alpha[x] <= kAlphaMax)) {
            throw DomainError("sticky walk: alpha out of [0, alpha_max] at node " + std::to_string(x));
        }
        if (!(beta[x] >= 0.0) || !std::isfinite(beta[x])) {
            throw DomainError("sticky walk: beta must be finite and nonnegative");
        }
    }
}

StickyChain build_chain(const StickyWalkModel& model) {
    model.validate();
    const auto& g = model.graph;
    std::vector<Transition> transitions;
    transitions.reserve(2 * g.edge_count() + g.size());
    std::vector<double> reward(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
        const double a = model.alpha[x];
        const double move = (1.0 - a) / static_cast<double>(g.degree(x));
        if (a > 0.0) transitions.push_back({x, x, a});
        for (auto y : g.neighbors(x)) transitions.push_back({x, y, move});
        reward[x] = model.beta[x] - stickiness_cost(model.kappa, a);
    }
    return StickyChain{SparseChain(g.size(), std::move(transitions)), std::move(reward)};
}

Distribution closed_form_stationary(const StickyWalkModel& model) {
    model.validate();
    std::vector<double> mu(model.graph.size());
    for (std::size_t x = 0; x < mu.size(); ++x) {
        mu[x] = static_cast<double>(model.graph.degree(x)) / (1.0 - model.alpha[x]);
    }
    const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
    for (auto& m : mu) m /= total;
    return Distribution{std::move(mu)};
}

std::string_view reward_kind_name(RewardKind kind) {
    return kind == RewardKind::UniformRandom ? "uniform" : "distance";
}

RewardKind parse_reward_kind(std::string_view name) {
    if (name == "uniform") return RewardKind::UniformRandom;
    if (name == "distance") return RewardKind::DistanceToTarget;
    throw DomainError("unknown reward kind '" + std::string(name) + "' (expected uniform or distance)");
}

std::vector<double> reward_model(const UndirectedGraph& graph, RewardKind kind, std::size_t target,
                                 std::uint64_t seed) {
    std::vector<double> beta(graph.size());
    if (kind == RewardKind::UniformRandom) {
        SplitMix64 rng = SplitMix64::stream(seed, 0x5257);
        for (auto& b : beta) b = rng.uniform();
        return beta;
    }
    const auto dist = bfs_distances(graph, target);
    for (std::size_t x = 0; x < graph.size(); ++x) {
        beta[x] = dist[x] == std::numeric_limits<std::size_t>::max() ? 0.0
                                                                      : 1.0 / (static_cast<double>(dist[x]) + 1.0);
    }
    return beta;
}

std::vector<double> initial_alpha(std::size_t n, double lo, double hi, std::uint64_t seed) {
    if (!(lo >= 0.0 && lo <= hi && hi <= kAlphaMax)) throw DomainError("initial_alpha: need 0 <= lo <= hi <= alpha_max");
    SplitMix64 rng = SplitMix64::stream(seed, 0x414c);
    std::vector<double> alpha(n);
    for (auto& a : alpha) a = rng.uniform(lo, hi);
    return alpha;
}

std::vector<double> improve_policy(const StickyWalkModel& model, std::span<const double> v) {
    model.validate();
    const auto& g = model.graph;
    if (v.size() != g.size()) throw DomainError("improve_policy: value size mismatch");
    std::vector<double> alpha(g.size(), 0.0);
    if (model.gamma == 0.0) return alpha;
    const double threshold = model.kappa / model.gamma;
    for (std::size_t x = 0; x < g.size(); ++x) {
        double mean = 0.0;
        for (auto y : g.neighbors(x)) mean += v[y];
        mean /= static_cast<double>(g.degree(x));
        const double gain = v[x] - mean;
        if (!(gain > threshold)) continue;
        alpha[x] = std::clamp(1.0 - std::sqrt(threshold / gain), 0.0, kAlphaMax);
    }
    return alpha;
}

std::string Evaluator::name() const {
    return std::string(kind == Kind::PageRank ? schedule_name(schedule.kind) : bellman_solver_name(bellman));
}

Evaluator Evaluator::parse(std::string_view name) {
    Evaluator e;
    for (auto kind : kAllSchedules) {
        if (schedule_name(kind) == name) {
            e.kind = Kind::PageRank;
            e.schedule.kind = kind;
            return e;
        }
    }
    e.kind = Kind::Bellman;
    e.bellman = parse_bellman_solver(name);
    return e;
}

EvaluationRun evaluate_policy(const StickyWalkModel& model, const Evaluator& evaluator, double tol,
                              std::uint64_t max_updates) {
    const auto built = build_chain(model);
    const EvalProblem problem{built.chain, model.gamma, built.reward};
    EvaluationRun run;
    if (evaluator.kind == Evaluator::Kind::Bellman) {
        BellmanOptions options;
        options.tol = tol;
        options.max_updates = max_updates;
        auto result = bellman_direct(problem, evaluator.bellman, options);
        run.v = std::move(result.value.v);
        run.residual = result.value.bellman_residual_l1;
        run.stats = std::move(result.stats);
        return run;
    }
    const auto mu = closed_form_stationary(model);
    ReductionOptions options;
    options.schedule = evaluator.schedule;
    options.tol = tol;
    options.max_updates = max_updates;
    options.stationary = &mu;
    auto result = value_via_pagerank_irreducible(problem, options);
    run.v = std::move(result.value.v);
    run.residual = result.value.bellman_residual_l1;
    run.stats = std::move(result.stats);
    return run;
}

PolicyIterationResult policy_iteration(StickyWalkModel model, const PolicyIterationOptions& options) {
    model.validate();
    if (options.max_rounds == 0) throw DomainError("policy_iteration: max_rounds must be positive");
    PolicyIterationResult result;
    for (std::size_t round = 0; round < options.max_rounds; ++round) {
        EvaluationRun run;
        try {
            run = evaluate_policy(model, options.evaluator, options.tol, options.max_updates);
        } catch (const ConvergenceError& e) {
            throw PolicyIterationError(e, std::move(result.rounds));
        }
        PolicyRound record;
        record.alpha = model.alpha;
        record.average_value = std::accumulate(run.v.begin(), run.v.end(), 0.0) / static_cast<double>(run.v.size());
        record.v = std::move(run.v);
        record.stats = std::move(run.stats);

        auto next = improve_policy(model, record.v);
        double change = 0.0;
        for (std::size_t x = 0; x < next.size(); ++x) change = std::max(change, std::abs(next[x] - model.alpha[x]));
        result.rounds.push_back(std::move(record));
        model.alpha = std::move(next);
        if (change < options.alpha_tol) {
            result.converged = true;
            break;
        }
    }
    result.alpha = model.alpha;
    return result;
}

} // namespace revrank
