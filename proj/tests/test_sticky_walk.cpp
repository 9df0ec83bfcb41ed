#include "revrank/dense_oracle.hpp"
#include "revrank/error.hpp"
#include "revrank/markov.hpp"
#include "revrank/sticky_walk.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace revrank;
using testing::linf;

namespace {

UndirectedGraph single_edge() { return UndirectedGraph(2, {{0, 1}}); }

StickyWalkModel model_on(const UndirectedGraph& g, std::vector<double> alpha, std::vector<double> beta) {
    return StickyWalkModel{g, std::move(alpha), std::move(beta), 0.1, 0.9};
}

// Exact values of a 2-node sticky walk by Cramer's rule.
std::pair<double, double> two_node_value(const std::vector<double>& beta, double a0, double a1, double kappa,
                                         double gamma) {
    const double r0 = beta[0] - stickiness_cost(kappa, a0), r1 = beta[1] - stickiness_cost(kappa, a1);
    const double m00 = 1 - gamma * a0, m01 = -gamma * (1 - a0);
    const double m10 = -gamma * (1 - a1), m11 = 1 - gamma * a1;
    const double det = m00 * m11 - m01 * m10;
    return {(r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det};
}

} // namespace

TEST_CASE("graph construction and validation") {
    const UndirectedGraph g(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(g.size() == 4);
    CHECK(g.edge_count() == 3);
    CHECK(g.degree(1) == 2);
    CHECK(g.is_connected());
    CHECK_FALSE(UndirectedGraph(4, {{0, 1}, {2, 3}}).is_connected());
    CHECK_THROWS_AS(UndirectedGraph(3, {{0, 3}}), DomainError);
    CHECK_THROWS_AS(UndirectedGraph(3, {{1, 1}}), DomainError);
    CHECK_THROWS_AS(UndirectedGraph(3, {{0, 1}, {1, 0}}), DomainError);

    std::stringstream buf;
    write_graph(buf, g);
    const auto back = read_graph(buf);
    CHECK(back.edges() == g.edges());
}

TEST_CASE("grid graph combinatorics") {
    const auto g = grid_graph(3, 3);
    CHECK(g.size() == 9);
    CHECK(g.edge_count() == 12);
    CHECK(g.degree(0) == 2);
    CHECK(g.degree(8) == 2);
    CHECK(g.degree(grid_center(3, 3)) == 4);
    CHECK(grid_center(3, 3) == 4);
    CHECK(grid_graph(100, 100).edge_count() == 2 * 100 * 99);
    CHECK_THROWS_AS(grid_graph(1, 5), DomainError);
}

TEST_CASE("preferential attachment edge count and determinism") {
    for (std::size_t n : {5, 10, 100, 1000}) {
        const auto g = pa_graph(n, 3, 42);
        CHECK(g.edge_count() == 3 * (n - 4) + 6);
        CHECK(g.is_connected());
        for (std::size_t x = 0; x < n; ++x) CHECK(g.degree(x) >= 3);
    }
    CHECK(pa_graph(500, 3, 1).edges() == pa_graph(500, 3, 1).edges());
    CHECK(pa_graph(500, 3, 1).edges() != pa_graph(500, 3, 2).edges());
    CHECK_THROWS_AS(pa_graph(3, 3, 1), DomainError);
}

TEST_CASE("preferential attachment favours early hubs") {
    const auto g = pa_graph(5000, 3, 9);
    const auto hub = max_degree_node(g);
    CHECK(hub < 50);
    CHECK(g.degree(hub) > 30);
}

TEST_CASE("erdos-renyi edge count within four standard deviations") {
    const std::size_t n = 200;
    const double p = 0.1;
    const double pairs = n * (n - 1) / 2.0;
    const int batch = 10;
    double total = 0.0;
    for (int seed = 1; seed <= batch; ++seed) {
        const auto er = er_graph(n, p, static_cast<std::uint64_t>(seed));
        REQUIRE(er.graph.size() == n);  // connected at this density
        CHECK_FALSE(er.small_component);
        total += static_cast<double>(er.graph.edge_count());
    }
    const double mean = total / batch;
    const double sd = std::sqrt(pairs * p * (1 - p) / batch);
    CHECK(std::abs(mean - pairs * p) <= 4 * sd);
}

TEST_CASE("erdos-renyi keeps the largest component") {
    const auto sparse = er_graph(400, 0.002, 3);
    CHECK(sparse.generated_n == 400);
    CHECK(sparse.graph.is_connected());
    CHECK(sparse.graph.size() < 400);
    CHECK(sparse.small_component == (sparse.graph.size() * 2 < 400));
    CHECK(default_er_probability(10000) == doctest::Approx(2 * std::log(10000.0) / 10000));
    CHECK_THROWS_AS(er_graph(10, 0.0, 1), DomainError);
    CHECK_THROWS_AS(er_graph(10, 1.5, 1), DomainError);
}

TEST_CASE("bfs distances on the grid") {
    const auto d = bfs_distances(grid_graph(3, 3), 4);
    CHECK(d == std::vector<std::size_t>{2, 1, 2, 1, 0, 1, 2, 1, 2});
}

TEST_CASE("stickiness cost") {
    CHECK(stickiness_cost(0.1, 0.5) == doctest::Approx(0.1));
    CHECK(stickiness_cost(0.1, 0.0) == 0.0);
}

TEST_CASE("sticky chain construction") {
    const auto g = grid_graph(3, 3);
    std::vector<double> beta(9);
    for (std::size_t x = 0; x < 9; ++x) beta[x] = 0.1 * static_cast<double>(x);
    const auto plain = build_chain(model_on(g, std::vector<double>(9, 0.0), beta));
    CHECK(plain.reward == beta);
    CHECK(plain.chain.at(0, 1) == 0.5);
    CHECK(plain.chain.self_loop(0) == 0.0);

    const auto edge = build_chain(model_on(single_edge(), {0.5, 0.0}, {1.0, 0.0}));
    CHECK(testing::max_entry_gap(edge.chain, SparseChain::from_dense({{0.5, 0.5}, {1.0, 0.0}})) == 0.0);
    CHECK(edge.reward == std::vector<double>{1.0 - 0.1, 0.0});
}

TEST_CASE("sticky model validation") {
    CHECK_THROWS_AS(build_chain(model_on(UndirectedGraph(3, {{0, 1}}), {0, 0, 0}, {1, 1, 1})), DomainError);
    CHECK_THROWS_AS(build_chain(model_on(single_edge(), {0.99, 0.0}, {1, 1})), DomainError);
    CHECK_THROWS_AS(build_chain(model_on(single_edge(), {0.5}, {1, 1})), DomainError);
    CHECK_THROWS_AS(build_chain(model_on(single_edge(), {0.5, 0.0}, {-1, 1})), DomainError);
}

TEST_CASE("closed-form stationary law") {
    const auto g = grid_graph(4, 3);
    const auto plain = closed_form_stationary(model_on(g, std::vector<double>(12, 0.0), std::vector<double>(12, 1)));
    for (std::size_t x = 0; x < 12; ++x) {
        CHECK(plain[x] == doctest::Approx(static_cast<double>(g.degree(x)) / (2.0 * g.edge_count())));
    }

    std::vector<std::pair<std::size_t, std::size_t>> ring;
    for (std::size_t x = 0; x < 7; ++x) ring.emplace_back(x, (x + 1) % 7);
    const auto regular = closed_form_stationary(model_on(UndirectedGraph(7, ring), std::vector<double>(7, 0.4),
                                                         std::vector<double>(7, 1)));
    CHECK(linf(regular.values, std::vector<double>(7, 1.0 / 7)) < 1e-15);

    const auto edge = closed_form_stationary(model_on(single_edge(), {0.5, 0.0}, {1, 1}));
    CHECK(linf(edge.values, std::vector<double>{2.0 / 3, 1.0 / 3}) < 1e-15);
}

TEST_CASE("closed form matches power iteration and detailed balance on random graphs") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto g = pa_graph(300, 2, seed);
        const auto model = model_on(g, initial_alpha(300, 0.0, kAlphaMax, seed), std::vector<double>(300, 1));
        const auto built = build_chain(model);
        const auto mu = closed_form_stationary(model);
        CHECK(detailed_balance_gap(built.chain, mu) <= 1e-12);
        const auto power = stationary_distribution(built.chain, {1e-14, 1'000'000});
        double l1 = 0.0;
        for (std::size_t x = 0; x < 300; ++x) l1 += std::abs(power[x] - mu[x]);
        CHECK(l1 <= 1e-10);
        CHECK(dense::relative_linf(mu.values, dense::stationary(built.chain)) < 1e-10);
    }
}

TEST_CASE("reward models") {
    const auto g = grid_graph(3, 3);
    const auto beta = reward_model(g, RewardKind::DistanceToTarget, 4, 1);
    CHECK(beta[4] == 1.0);
    CHECK(beta[1] == 0.5);
    CHECK(beta[0] == doctest::Approx(1.0 / 3));

    const auto u = reward_model(pa_graph(1000, 3, 1), RewardKind::UniformRandom, 0, 5);
    CHECK(*std::min_element(u.begin(), u.end()) >= 0.0);
    CHECK(*std::max_element(u.begin(), u.end()) < 1.0);
    double mean = 0.0;
    for (double b : u) mean += b / 1000.0;
    CHECK(std::abs(mean - 0.5) < 4 * std::sqrt(1.0 / 12 / 1000));
    CHECK(u == reward_model(pa_graph(1000, 3, 1), RewardKind::UniformRandom, 0, 5));

    CHECK(parse_reward_kind(reward_kind_name(RewardKind::DistanceToTarget)) == RewardKind::DistanceToTarget);
    CHECK_THROWS_AS(parse_reward_kind("gaussian"), DomainError);

    const auto alpha = initial_alpha(500, 0.1, 0.9, 3);
    CHECK(*std::min_element(alpha.begin(), alpha.end()) >= 0.1);
    CHECK(*std::max_element(alpha.begin(), alpha.end()) <= 0.9);
}

TEST_CASE("policy improvement closed form") {
    // Node 0 has value gain v(0) - mean(neighbors) set directly.
    const auto g = single_edge();
    const auto model = model_on(g, {0.0, 0.0}, {1, 1});
    CHECK(improve_policy(model, std::vector<double>{1.0, 2.0})[0] == 0.0);
    CHECK(improve_policy(model, std::vector<double>{2.0, 1.0})[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(improve_policy(model, std::vector<double>{1e9, 0.0})[0] == kAlphaMax);

    // Grid search oracle on the one-node objective.
    for (double gain : {0.05, 0.2, 1.0, 3.0, 40.0}) {
        const auto alpha = improve_policy(model, std::vector<double>{gain, 0.0})[0];
        double best = -1e300, arg = 0.0;
        for (int k = 0; k <= 9500; ++k) {
            const double a = k * 1e-4;
            const double obj = -stickiness_cost(0.1, a) + 0.9 * a * gain;
            if (obj > best) best = obj, arg = a;
        }
        CHECK(std::abs(alpha - arg) <= 1e-4);
    }
}

TEST_CASE("evaluator names") {
    for (const char* name : {"pr-power", "rlgl-gsd", "bellman-gauss-seidel", "bellman-prioritized"}) {
        CHECK(Evaluator::parse(name).name() == name);
    }
    CHECK(Evaluator::parse("rlgl-maxc").kind == Evaluator::Kind::PageRank);
    CHECK(Evaluator::parse("bellman-jacobi").kind == Evaluator::Kind::Bellman);
    CHECK_THROWS_AS(Evaluator::parse("magic"), DomainError);
}

TEST_CASE("policy evaluation agrees across evaluators") {
    const auto g = grid_graph(8, 8);
    const auto model = model_on(g, initial_alpha(64, 0.1, 0.9, 2), reward_model(g, RewardKind::UniformRandom, 0, 2));
    const auto built = build_chain(model);
    const auto exact = dense::value(built.chain, 0.9, built.reward);
    for (const char* name : {"pr-power", "pr-gauss-seidel", "pr-max-residual", "rlgl-maxc", "rlgl-gsd",
                             "bellman-gauss-seidel", "bellman-prioritized", "bellman-jacobi"}) {
        CAPTURE(name);
        const auto run = evaluate_policy(model, Evaluator::parse(name), 1e-10);
        CHECK(run.residual <= 1e-10);
        CHECK(linf(run.v, exact) < 1e-9);
        CHECK(!run.stats.residual_trace.empty());
    }
}

TEST_CASE("policy iteration with zero rewards stops at the lazy-free policy") {
    const auto g = grid_graph(4, 4);
    const auto result = policy_iteration(model_on(g, std::vector<double>(16, 0.0), std::vector<double>(16, 0.0)));
    CHECK(result.converged);
    CHECK(result.rounds.size() == 1);
    CHECK(linf(result.alpha, std::vector<double>(16, 0.0)) == 0.0);
    CHECK(linf(result.rounds[0].v, std::vector<double>(16, 0.0)) == 0.0);
}

TEST_CASE("policy iteration on a single edge matches brute force") {
    const std::vector<double> beta{1.0, 0.2};
    const double kappa = 0.1, gamma = 0.9;
    PolicyIterationOptions options;
    options.tol = 1e-12;
    options.evaluator = Evaluator::parse("rlgl-gsd");
    const auto result = policy_iteration(StickyWalkModel{single_edge(), {0.3, 0.3}, beta, kappa, gamma}, options);
    REQUIRE(result.converged);

    double best = -1e300, a0 = 0.0, a1 = 0.0;
    for (int i = 0; i <= 950; ++i) {
        for (int j = 0; j <= 950; ++j) {
            const auto [v0, v1] = two_node_value(beta, i * 1e-3, j * 1e-3, kappa, gamma);
            if (v0 + v1 > best) best = v0 + v1, a0 = i * 1e-3, a1 = j * 1e-3;
        }
    }
    CHECK(std::abs(result.alpha[0] - a0) <= 1e-3);
    CHECK(std::abs(result.alpha[1] - a1) <= 1e-3);
    const auto [p0, p1] = two_node_value(beta, result.alpha[0], result.alpha[1], kappa, gamma);
    CHECK(p0 + p1 >= best - 1e-9);
    // No grid policy beats the fixed point at either node.
    for (int i = 0; i <= 950; i += 10) {
        for (int j = 0; j <= 950; j += 10) {
            const auto [v0, v1] = two_node_value(beta, i * 1e-3, j * 1e-3, kappa, gamma);
            CHECK(v0 <= p0 + 1e-9);
            CHECK(v1 <= p1 + 1e-9);
        }
    }
}

TEST_CASE("policy iteration average value is nondecreasing") {
    const auto g = grid_graph(12, 12);
    const auto model =
        model_on(g, initial_alpha(144, 0.1, 0.9, 4), reward_model(g, RewardKind::UniformRandom, 0, 4));
    for (const char* name : {"rlgl-gsd", "bellman-gauss-seidel"}) {
        PolicyIterationOptions options;
        options.evaluator = Evaluator::parse(name);
        const auto result = policy_iteration(model, options);
        CHECK(result.converged);
        for (std::size_t k = 1; k < result.rounds.size(); ++k) {
            CHECK(result.rounds[k].average_value >= result.rounds[k - 1].average_value - 10 * options.tol);
        }
    }
}
