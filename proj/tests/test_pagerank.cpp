#include "revrank/dense_oracle.hpp"
#include "revrank/error.hpp"
#include "revrank/markov.hpp"
#include "revrank/pagerank.hpp"
#include "revrank/random_chains.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace revrank;
using testing::linf;

namespace {

Distribution random_restart(std::size_t n, SplitMix64& rng) {
    std::vector<double> u(n);
    for (auto& x : u) x = rng.uniform(0.01, 1.0);
    const double total = std::accumulate(u.begin(), u.end(), 0.0);
    for (auto& x : u) x /= total;
    return Distribution{u};
}

double l1(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
}

} // namespace

TEST_CASE("schedule names round-trip") {
    for (auto kind : kAllSchedules) CHECK(parse_schedule(schedule_name(kind)) == kind);
    CHECK_THROWS_AS(parse_schedule("nope"), DomainError);
}

TEST_CASE("pagerank hand examples for every schedule") {
    const auto rev = testing::reversed_cycle3();
    for (auto kind : kAllSchedules) {
        CAPTURE(schedule_name(kind));
        const Schedule schedule{kind};

        const auto w = solve_pagerank({rev, 0.5, Distribution{{1, 0, 0}}}, schedule, {1e-13});
        CHECK(linf(w.w, std::vector<double>{4.0 / 7, 1.0 / 7, 2.0 / 7}) < 1e-12);
        CHECK(w.residual <= 1e-13);

        const Distribution u{{0.2, 0.3, 0.5}};
        const auto none = solve_pagerank({testing::cycle3(), 0.0, u}, schedule);
        CHECK(linf(none.w, u.values) < 1e-15);

        const Distribution mu{{1.0 / 3, 2.0 / 3}};
        const auto fixed = solve_pagerank({testing::two_state(), 0.8, mu}, schedule, {1e-13});
        CHECK(linf(fixed.w, mu.values) < 1e-12);
    }
}

TEST_CASE("all schedules agree with the dense resolvent") {
    SplitMix64 rng(31);
    for (int k = 0; k < 15; ++k) {
        const auto m = random_irreducible_chain(2 + rng.below(80), rng);
        const auto u = random_restart(m.size(), rng);
        const double c = rng.uniform(0.1, 0.95);
        const auto exact = dense::pagerank(m, c, u.values);
        for (auto kind : kAllSchedules) {
            CAPTURE(schedule_name(kind));
            const auto sol = solve_pagerank({m, c, u}, Schedule{kind}, {1e-12});
            CHECK(sol.residual <= 1e-12);
            CHECK(l1(sol.w) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(dense::relative_linf(sol.w, exact) < 1e-9);
            CHECK(sol.stats.normalized_iterations > 0.0);
            CHECK(sol.stats.edges_processed >= sol.stats.coordinate_updates);
        }
    }
}

TEST_CASE("substochastic matrices are accepted") {
    const auto q = SparseChain::from_dense({{0.0, 0.5}, {0.5, 0.0}});
    const Distribution u{{0.5, 0.5}};
    const auto sol = solve_pagerank({q, 0.5, u}, Schedule{ScheduleKind::RlglGsd}, {1e-13});
    CHECK(dense::relative_linf(sol.w, dense::pagerank(q, 0.5, u.values)) < 1e-12);
}

TEST_CASE("solves are deterministic") {
    SplitMix64 rng(4);
    const auto m = random_irreducible_chain(50, rng);
    const auto u = random_restart(50, rng);
    for (auto kind : kAllSchedules) {
        const auto a = solve_pagerank({m, 0.9, u}, Schedule{kind});
        const auto b = solve_pagerank({m, 0.9, u}, Schedule{kind});
        CHECK(a.w == b.w);
        CHECK(a.stats.edges_processed == b.stats.edges_processed);
    }
}

TEST_CASE("invalid problems are rejected") {
    const auto m = testing::two_state();
    const Distribution u{{0.5, 0.5}};
    CHECK_THROWS_AS(solve_pagerank({m, 1.0, u}, Schedule{}), DomainError);
    CHECK_THROWS_AS(solve_pagerank({m, 0.5, Distribution{{1.0}}}, Schedule{}), DomainError);
    CHECK_THROWS_AS(solve_pagerank({m, 0.5, u}, Schedule{}, {0.0}), DomainError);
    CHECK_THROWS_AS(solve_pagerank({m, 0.5, u}, Schedule{ScheduleKind::RlglGsd, 1.0}), DomainError);
}

TEST_CASE("update cap raises with the best iterate") {
    SplitMix64 rng(9);
    const auto m = random_irreducible_chain(40, rng);
    const auto u = random_restart(40, rng);
    PageRankOptions options;
    options.tol = 1e-14;
    options.max_updates = 30;
    try {
        solve_pagerank({m, 0.99, u}, Schedule{ScheduleKind::GaussSeidelCyclic}, options);
        FAIL("expected the cap to trigger");
    } catch (const SolveCapError& e) {
        CHECK(e.residual() > 1e-14);
        CHECK(e.iterate().size() == 40);
        CHECK(e.stats().capped);
    }
}

TEST_CASE("a synchronous sweep from r = (1 - c) u is one Neumann step") {
    SplitMix64 rng(12);
    const auto m = random_irreducible_chain(15, rng);
    const auto u = random_restart(15, rng);
    const double c = 0.6;
    const PageRankProblem problem{m, c, u};
    PushWorkspace ws(problem);
    ws.synchronous_sweep();
    ws.synchronous_sweep();
    // Two terms of (1 - c) u sum_k (cM)^k.
    std::vector<double> um(15);
    m.left_multiply(u.values, um);
    for (std::size_t s = 0; s < 15; ++s) {
        CHECK(ws.estimate()[s] == doctest::Approx((1 - c) * (u[s] + c * um[s])).epsilon(1e-14));
    }
    CHECK(ws.edges_processed() == 2 * m.nnz());
}

TEST_CASE("pushes conserve mass on a stochastic matrix") {
    SplitMix64 rng(14);
    const auto m = random_irreducible_chain(15, rng);
    const auto u = random_restart(15, rng);
    const PageRankProblem problem{m, 0.6, u};
    PushWorkspace ws(problem);
    for (std::size_t s = 0; s < 15; ++s) ws.push(s);
    CHECK(ws.updates() == 15);
    CHECK(ws.edges_processed() == m.nnz());
    double mass = 0.0;
    for (std::size_t s = 0; s < 15; ++s) {
        CHECK(ws.residual()[s] >= 0.0);
        mass += ws.estimate()[s];
    }
    // Push conserves (1 - c) sum p + sum r = 1 - c for stochastic M.
    CHECK((1 - 0.6) * mass + ws.exact_residual() == doctest::Approx(1 - 0.6).epsilon(1e-13));
}

TEST_CASE("pushing a zero residual is a no-op") {
    const auto m = testing::reversed_cycle3();
    const PageRankProblem problem{m, 0.5, Distribution{{1, 0, 0}}};
    PushWorkspace ws(problem);
    const std::vector<double> p(ws.estimate().begin(), ws.estimate().end());
    const std::vector<double> r(ws.residual().begin(), ws.residual().end());
    ws.push(1);
    CHECK(std::vector<double>(ws.estimate().begin(), ws.estimate().end()) == p);
    CHECK(std::vector<double>(ws.residual().begin(), ws.residual().end()) == r);
}

TEST_CASE("push invariant p + r (I - cM)^-1 = w holds after arbitrary pushes") {
    SplitMix64 rng(19);
    for (int k = 0; k < 20; ++k) {
        const std::size_t n = 2 + rng.below(19);
        const auto m = random_irreducible_chain(n, rng);
        const auto u = random_restart(n, rng);
        const double c = rng.uniform(0.1, 0.95);
        const auto exact = dense::pagerank(m, c, u.values);
        const PageRankProblem problem{m, c, u};
        PushWorkspace ws(problem);
        const std::size_t pushes = rng.below(5 * n);
        for (std::size_t j = 0; j < pushes; ++j) ws.push(rng.below(n));

        // Solve (I - cM)^T x = r, i.e. x = r (I - cM)^{-1}.
        const auto r = ws.residual();
        const auto nn = static_cast<Eigen::Index>(n);
        const Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(nn, nn) - c * dense::to_dense(m)).transpose();
        const Eigen::VectorXd carried = a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(r.data(), nn));
        double gap = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            gap = std::max(gap, std::abs(ws.estimate()[s] + carried(static_cast<Eigen::Index>(s)) - exact[s]));
        }
        CHECK(gap < 1e-13);
        double tracked = 0.0;
        for (double x : r) tracked += std::abs(x);
        CHECK(ws.exact_residual() == doctest::Approx(tracked).epsilon(1e-12));
    }
}

TEST_CASE("monte carlo pagerank") {
    const Distribution u{{0.2, 0.3, 0.5}};
    const auto teleport_only = mc_pagerank({testing::cycle3(), 0.0, u}, 200'000, 3);
    CHECK(linf(teleport_only.values, u.values) < 0.01);

    const auto rev = mc_pagerank({testing::reversed_cycle3(), 0.5, Distribution{{1, 0, 0}}}, 1'000'000, 1);
    const std::vector<double> exact{4.0 / 7, 1.0 / 7, 2.0 / 7};
    CHECK(0.5 * (std::abs(rev[0] - exact[0]) + std::abs(rev[1] - exact[1]) + std::abs(rev[2] - exact[2])) < 3e-3);

    const auto delta = mc_pagerank({testing::cycle3(), 0.3, Distribution{{0, 1, 0}}}, 100'000, 2);
    CHECK(delta[1] >= 0.7 - 0.005);

    const auto again = mc_pagerank({testing::reversed_cycle3(), 0.5, Distribution{{1, 0, 0}}}, 1'000'000, 1);
    CHECK(again.values == rev.values);
}
