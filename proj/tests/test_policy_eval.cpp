#include "revrank/dense_oracle.hpp"
#include "revrank/error.hpp"
#include "revrank/policy_eval.hpp"
#include "revrank/random_chains.hpp"
#include "revrank/validate.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace revrank;
using testing::linf;

namespace {

constexpr BellmanSolver kBellmanSolvers[] = {BellmanSolver::GaussSeidel, BellmanSolver::PrioritizedSweeping,
                                             BellmanSolver::Jacobi};

std::vector<double> random_reward(std::size_t n, SplitMix64& rng, double lo, double hi) {
    std::vector<double> r(n);
    for (auto& x : r) x = rng.uniform(lo, hi);
    return r;
}

} // namespace

TEST_CASE("bellman solver names round-trip") {
    for (auto s : kBellmanSolvers) CHECK(parse_bellman_solver(bellman_solver_name(s)) == s);
    CHECK_THROWS_AS(parse_bellman_solver("value-iteration"), DomainError);
}

TEST_CASE("bellman residual") {
    const auto p = testing::cycle3();
    const std::vector<double> r{1, 0, 0}, v{8.0 / 7, 2.0 / 7, 4.0 / 7};
    CHECK(bellman_residual_l1(p, 0.5, r, v) < 1e-15);
    const auto res = bellman_residual(p, 0.5, r, std::vector<double>(3, 0.0));
    CHECK(linf(res, std::vector<double>{-1, 0, 0}) == 0.0);
}

TEST_CASE("bellman baselines on hand examples") {
    const auto p = testing::cycle3();
    for (auto solver : kBellmanSolvers) {
        CAPTURE(bellman_solver_name(solver));
        const std::vector<double> r{0.3, 0.7, 0.1};
        const auto zero = bellman_direct({p, 0.0, r}, solver, {1e-14});
        CHECK(linf(zero.value.v, r) < 1e-15);

        const auto hand = bellman_direct({p, 0.5, {1, 0, 0}}, solver, {1e-13});
        CHECK(linf(hand.value.v, std::vector<double>{8.0 / 7, 2.0 / 7, 4.0 / 7}) < 1e-12);
        CHECK(hand.value.bellman_residual_l1 <= 1e-13);

        SplitMix64 rng(1);
        const auto q = random_irreducible_chain(40, rng);
        const auto ones = bellman_direct({q, 0.9, std::vector<double>(40, 1.0)}, solver, {1e-12});
        CHECK(linf(ones.value.v, std::vector<double>(40, 10.0)) < 1e-11);
    }
}

TEST_CASE("bellman baselines match the dense solve") {
    SplitMix64 rng(23);
    for (int k = 0; k < 15; ++k) {
        const auto p = random_reducible_chain(60, 4, rng);
        const auto r = random_reward(p.size(), rng, -1.0, 1.0);
        const double gamma = rng.uniform(0.3, 0.95);
        const auto exact = dense::value(p, gamma, r);
        for (auto solver : kBellmanSolvers) {
            const auto got = bellman_direct({p, gamma, r}, solver, {1e-12});
            CHECK(got.value.bellman_residual_l1 <= 1e-12);
            CHECK(bellman_residual_l1(p, gamma, r, got.value.v) <= 1e-12 * 1.01);
            CHECK(dense::relative_linf(got.value.v, exact) < 1e-10);
        }
    }
}

TEST_CASE("bellman cap and input errors") {
    SplitMix64 rng(2);
    const auto p = random_irreducible_chain(30, rng);
    BellmanOptions options;
    options.tol = 1e-14;
    options.max_updates = 10;
    CHECK_THROWS_AS(bellman_direct({p, 0.99, std::vector<double>(30, 1.0)}, BellmanSolver::GaussSeidel, options),
                    SolveCapError);
    CHECK_THROWS_AS(bellman_direct({p, 0.9, std::vector<double>(3, 1.0)}, BellmanSolver::GaussSeidel), DomainError);
    CHECK_THROWS_AS(bellman_direct({p, 1.5, std::vector<double>(30, 1.0)}, BellmanSolver::GaussSeidel), DomainError);
    const auto sub = SparseChain::from_dense({{0.0, 0.5}, {0.5, 0.0}});
    CHECK_THROWS_AS(bellman_direct({sub, 0.5, {1, 1}}, BellmanSolver::GaussSeidel), DomainError);
}

TEST_CASE("irreducible reduction hand examples") {
    const auto p = testing::cycle3();
    const auto hand = value_via_pagerank_irreducible({p, 0.5, {1, 0, 0}}, {.tol = 1e-13});
    CHECK(linf(hand.value.v, std::vector<double>{8.0 / 7, 2.0 / 7, 4.0 / 7}) < 1e-12);
    REQUIRE(hand.certificate.classes.size() == 1);
    const auto& cert = hand.certificate.classes[0];
    CHECK(cert.shift == 0.0);
    CHECK(cert.teleportation == 0.5);
    CHECK(linf(cert.restart, std::vector<double>{1, 0, 0}) < 1e-15);
    CHECK(cert.scaling == doctest::Approx((1.0 / 3) / 0.5));

    SplitMix64 rng(6);
    const auto q = random_irreducible_chain(25, rng);
    const auto ones = value_via_pagerank_irreducible({q, 0.9, std::vector<double>(25, 1.0)});
    CHECK(linf(ones.value.v, std::vector<double>(25, 10.0)) < 1e-10);
    const auto mu = stationary_distribution(q);
    CHECK(linf(ones.certificate.classes[0].restart, mu.values) < 1e-12);

    const auto r = random_reward(25, rng, 0.1, 1.0);
    const auto zero = value_via_pagerank_irreducible({q, 0.0, r});
    CHECK(linf(zero.value.v, r) < 1e-12);
}

TEST_CASE("irreducible reduction records a shift for nonpositive rewards") {
    SplitMix64 rng(7);
    const auto p = random_irreducible_chain(30, rng);
    const auto r = random_reward(30, rng, -1.0, 0.5);
    const auto res = value_via_pagerank_irreducible({p, 0.9, r});
    CHECK(res.certificate.classes[0].shift > 0.0);
    CHECK(dense::relative_linf(res.value.v, dense::value(p, 0.9, r)) < 1e-8);
    CHECK(res.value.bellman_residual_l1 <= 1e-10);
    CHECK(explain(res.certificate).find("shift=") != std::string::npos);
}

TEST_CASE("irreducible reduction matches the dense solve for every schedule") {
    SplitMix64 rng(29);
    for (int k = 0; k < 10; ++k) {
        const auto p = random_irreducible_chain(2 + rng.below(100), rng);
        const auto r = random_reward(p.size(), rng, 0.0, 1.0);
        const double gamma = k % 2 == 0 ? 0.9 : 0.99;
        const auto exact = dense::value(p, gamma, r);
        for (auto kind : kAllSchedules) {
            CAPTURE(schedule_name(kind));
            ReductionOptions options;
            options.schedule = Schedule{kind};
            const auto res = value_via_pagerank_irreducible({p, gamma, r}, options);
            CHECK(res.value.bellman_residual_l1 <= 1e-10);
            CHECK(bellman_residual_l1(p, gamma, r, res.value.v) <= 1e-10);
            CHECK(dense::relative_linf(res.value.v, exact) < 1e-8);
        }
    }
}

TEST_CASE("irreducible reduction input checks") {
    const auto p = testing::cycle3();
    CHECK_THROWS_AS(value_via_pagerank_irreducible({p, 1.0, {1, 0, 0}}), DomainError);
    const auto red = SparseChain::from_dense({{0.5, 0.5}, {0.0, 1.0}});
    CHECK_THROWS_AS(value_via_pagerank_irreducible({red, 0.5, {1, 1}}), DomainError);
}

TEST_CASE("general reduction hand examples") {
    const auto absorbing = SparseChain::from_dense({{0, 0.5, 0.5}, {0, 1, 0}, {0, 0, 1}});
    const auto a = value_via_pagerank_general({absorbing, 0.5, {1, 0, 0}});
    CHECK(linf(a.value.v, std::vector<double>{1, 0, 0}) < 1e-12);

    const auto leaky = SparseChain::from_dense({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0, 0, 1}});
    const auto b = value_via_pagerank_general({leaky, 0.8, {1, 1, 0}}, {.tol = 1e-13});
    CHECK(linf(b.value.v, std::vector<double>{5.0 / 3, 5.0 / 3, 0}) < 1e-12);
    bool saw_transient = false;
    for (const auto& c : b.certificate.classes) {
        if (c.kind != ClassKind::Transient) continue;
        saw_transient = true;
        CHECK(c.lambda == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(c.teleportation == doctest::Approx(0.4).epsilon(1e-12));
    }
    CHECK(saw_transient);

    SplitMix64 rng(3);
    const auto p = random_irreducible_chain(30, rng);
    const auto r = random_reward(30, rng, 0.0, 1.0);
    const auto g = value_via_pagerank_general({p, 0.9, r});
    const auto i = value_via_pagerank_irreducible({p, 0.9, r});
    CHECK(g.value.v == i.value.v);
}

TEST_CASE("singleton transient classes use the scalar formula") {
    const auto p = SparseChain::from_dense({{0.25, 0.75}, {0.0, 1.0}});
    const auto res = value_via_pagerank_general({p, 0.9, {1.0, 0.5}});
    CHECK(linf(res.value.v, dense::value(p, 0.9, std::vector<double>{1.0, 0.5})) < 1e-12);
    bool scalar = false;
    for (const auto& c : res.certificate.classes) scalar = scalar || (c.kind == ClassKind::Transient && c.scalar);
    CHECK(scalar);
}

TEST_CASE("general reduction on random reducible chains") {
    SplitMix64 rng(37);
    for (int k = 0; k < 25; ++k) {
        const auto p = random_reducible_chain(80, 6, rng);
        const auto r = random_reward(p.size(), rng, -1.0, 1.0);
        const double gamma = k % 3 == 0 ? 0.5 : (k % 3 == 1 ? 0.9 : 0.99);
        const auto res = value_via_pagerank_general({p, gamma, r});
        CHECK(dense::relative_linf(res.value.v, dense::value(p, gamma, r)) < 1e-8);
        CHECK(res.value.bellman_residual_l1 <= 1e-10);
        for (const auto& c : res.certificate.classes) {
            CHECK(c.teleportation < 1.0);
            if (c.kind == ClassKind::Transient && !c.skipped) {
                CHECK(c.lambda < 1.0);
                CHECK(c.teleportation == doctest::Approx(gamma * c.lambda).epsilon(1e-15));
            }
            if (!c.skipped && !c.scalar) {
                double total = 0.0;
                for (double x : c.restart) total += x;
                CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("zero-reward classes are skipped") {
    const auto p = SparseChain::from_dense({{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0, 0, 1}});
    const auto res = value_via_pagerank_general({p, 0.9, {0, 0, 0}});
    CHECK(linf(res.value.v, std::vector<double>(3, 0.0)) == 0.0);
    for (const auto& c : res.certificate.classes) CHECK(c.skipped);
    CHECK(explain(res.certificate).find("skipped=zero-reward") != std::string::npos);
}

TEST_CASE("undiscounted absorbing examples") {
    const auto p = SparseChain::from_dense({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0, 0, 1}});
    const auto res = value_undiscounted_absorbing({p, 1.0, {1, 1, 0}}, {.tol = 1e-13});
    CHECK(linf(res.value.v, std::vector<double>{2, 2, 0}) < 1e-12);

    for (double q : {0.0, 0.3, 0.9}) {
        std::vector<std::vector<double>> rows{{q, 1 - q}, {0, 1}};
        if (q == 0.0) rows[0] = {0.0, 1.0};
        const auto chain = SparseChain::from_dense(rows);
        const auto one = value_undiscounted_absorbing({chain, 1.0, {1, 0}});
        CHECK(one.value.v[0] == doctest::Approx(1.0 / (1.0 - q)).epsilon(1e-12));
    }

    SplitMix64 rng(41);
    for (int k = 0; k < 20; ++k) {
        const auto chain = random_birth_death_chain(1 + rng.below(50), rng);
        std::vector<double> r(chain.size(), 0.0);
        for (std::size_t s = 0; s + 2 < chain.size(); ++s) r[s] = rng.uniform();
        const auto got = value_undiscounted_absorbing({chain, 1.0, r});
        CHECK(dense::relative_linf(got.value.v, dense::absorbing_value(chain, r)) < 1e-8);
    }
}

TEST_CASE("undiscounted absorbing input checks") {
    const auto p = SparseChain::from_dense({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0, 0, 1}});
    CHECK_THROWS_AS(value_undiscounted_absorbing({p, 1.0, {1, 1, 1}}), DomainError);
    CHECK_THROWS_AS(value_undiscounted_absorbing({p, 0.9, {1, 1, 0}}), DomainError);
    CHECK_THROWS_AS(value_undiscounted_absorbing({p, 1.0, {1, -1, 0}}), DomainError);
}

TEST_CASE("resolvent adjointness") {
    SplitMix64 rng(43);
    for (int k = 0; k < 10; ++k) {
        const auto p = random_irreducible_chain(2 + rng.below(100), rng);
        const auto mu = stationary_distribution(p);
        for (double gamma : {0.0, 0.5, 0.95}) {
            const auto gap = check_resolvent_adjointness(p, mu, gamma, 2, rng());
            CHECK(gap.max_deviation() <= 1e-8);
        }
    }
}

TEST_CASE("monte carlo value") {
    const auto p = testing::cycle3();
    const auto zero = mc_value({p, 0.0, {0.3, 0.7, 0.1}}, 1, 1000, 10, 5);
    CHECK(zero.mean == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(zero.standard_error < 1e-12);

    const auto ones = mc_value({p, 0.9, {1, 1, 1}}, 0, 100, 400, 5);
    CHECK(ones.mean == doctest::Approx(10.0).epsilon(1e-12));

    const auto hand = mc_value({p, 0.5, {1, 0, 0}}, 0, 100'000, 80, 9);
    CHECK(std::abs(hand.mean - 8.0 / 7) <= 3 * hand.standard_error + 1e-15);

    SplitMix64 rng(47);
    const auto q = random_irreducible_chain(20, rng);
    const auto r = random_reward(20, rng, 0.0, 1.0);
    const auto exact = dense::value(q, 0.8, r);
    const auto est = mc_value({q, 0.8, r}, 4, 200'000, 200, 13);
    CHECK(std::abs(est.mean - exact[4]) <= 4 * est.standard_error);
    const auto again = mc_value({q, 0.8, r}, 4, 200'000, 200, 13);
    CHECK(again.mean == est.mean);
}

TEST_CASE("validation suite passes on small and degenerate sizes") {
    const auto small = validate_suite(2, 1, 10);
    CHECK(small.passed());
    const auto mid = validate_suite(50, 7, 20);
    CHECK(mid.passed());
    CHECK(mid.skipped_classes > 0);
    CHECK(mid.to_text().find("all checks passed") != std::string::npos);
    CHECK_THROWS_AS(validate_suite(1, 1), DomainError);
}
