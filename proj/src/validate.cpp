#include "revrank/validate.hpp"

#include "revrank/dense_oracle.hpp"
#include "revrank/markov.hpp"
#include "revrank/policy_eval.hpp"
#include "revrank/random_chains.hpp"
#include "revrank/sticky_walk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace revrank {
namespace {

constexpr double kThreshold = 1e-8;
constexpr double kGammas[] = {0.5, 0.9, 0.99};

std::size_t count_skipped(const ReductionCertificate& cert) {
    return static_cast<std::size_t>(
        std::count_if(cert.classes.begin(), cert.classes.end(), [](const auto& c) { return c.skipped; }));
}

std::size_t pick_size(SplitMix64& rng, std::size_t max_n) { return 1 + rng.below(max_n); }

} // namespace

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    out.precision(3);
    for (const auto& c : checks) {
        out << (c.passed() ? "ok   " : "FAIL ") << c.name << ": instances=" << c.instances
            << " max_deviation=" << std::scientific << c.max_deviation << " threshold=" << c.threshold
            << std::defaultfloat;
        if (!c.note.empty()) out << " (" << c.note << ')';
        out << '\n';
    }
    out << "skipped zero-reward classes: " << skipped_classes << '\n';
    out << (passed() ? "all checks passed" : "some checks FAILED") << '\n';
    return out.str();
}

ValidationReport validate_suite(std::size_t max_n, std::uint64_t seed, std::size_t instances) {
    if (max_n < 2) throw DomainError("validate_suite: max_n must be at least 2");
    ValidationReport report;
    SplitMix64 rng = SplitMix64::stream(seed, 0x56);

    {
        ValidationCheck check{"irreducible reduction vs dense solve", 0, 0.0, kThreshold, "relative l-inf"};
        for (std::size_t k = 0; k < instances; ++k) {
            const auto chain = random_irreducible_chain(pick_size(rng, max_n), rng);
            std::vector<double> r(chain.size());
            for (auto& x : r) x = rng.uniform();
            const double gamma = kGammas[k % 3];
            const auto result = value_via_pagerank_irreducible({chain, gamma, r});
            report.skipped_classes += count_skipped(result.certificate);
            check.max_deviation =
                std::max(check.max_deviation, dense::relative_linf(result.value.v, dense::value(chain, gamma, r)));
            ++check.instances;
        }
        report.checks.push_back(check);
    }

    {
        ValidationCheck check{"class decomposition vs dense solve", 0, 0.0, kThreshold, "relative l-inf, mixed-sign rewards"};
        auto run = [&](const SparseChain& chain, std::vector<double> r, double gamma) {
            const auto result = value_via_pagerank_general({chain, gamma, r});
            report.skipped_classes += count_skipped(result.certificate);
            check.max_deviation =
                std::max(check.max_deviation, dense::relative_linf(result.value.v, dense::value(chain, gamma, r)));
            ++check.instances;
        };
        // Singleton transient state feeding a singleton closed state.
        const auto tiny = SparseChain::from_dense({{0.5, 0.5}, {0.0, 1.0}});
        run(tiny, {1.0, -0.5}, 0.9);
        for (std::size_t k = 0; k < instances; ++k) {
            const auto chain = random_reducible_chain(std::max<std::size_t>(2, pick_size(rng, max_n)), 6, rng);
            std::vector<double> r(chain.size());
            for (auto& x : r) x = rng.uniform(-1.0, 1.0);
            run(chain, std::move(r), kGammas[k % 3]);
        }
        // All-zero rewards: every class is skipped and v = 0.
        const auto chain = random_reducible_chain(max_n, 6, rng);
        run(chain, std::vector<double>(chain.size(), 0.0), 0.9);
        report.checks.push_back(check);
    }

    {
        ValidationCheck check{"undiscounted absorbing vs dense solve", 0, 0.0, kThreshold, "relative l-inf"};
        for (std::size_t k = 0; k < instances; ++k) {
            const std::size_t absorbing = 1 + rng.below(std::min<std::size_t>(2, max_n - 1));
            const std::size_t total = pick_size(rng, max_n);
            const std::size_t transient = total > absorbing ? total - absorbing : 1;
            const auto chain = random_absorbing_chain(transient, absorbing, rng);
            std::vector<double> r(chain.size(), 0.0);
            for (std::size_t s = 0; s < transient; ++s) r[s] = rng.uniform();
            const auto result = value_undiscounted_absorbing({chain, 1.0, r});
            report.skipped_classes += count_skipped(result.certificate);
            check.max_deviation =
                std::max(check.max_deviation, dense::relative_linf(result.value.v, dense::absorbing_value(chain, r)));
            ++check.instances;
        }
        report.checks.push_back(check);
    }

    {
        ValidationCheck check{"resolvent adjointness", 0, 0.0, kThreshold, "pairing and measure conjugacy"};
        for (std::size_t k = 0; k < instances; ++k) {
            const auto chain = random_irreducible_chain(pick_size(rng, std::min<std::size_t>(max_n, 100)), rng);
            const auto mu = stationary_distribution(chain);
            const auto gap = check_resolvent_adjointness(chain, mu, kGammas[k % 3], 1, rng());
            check.max_deviation = std::max(check.max_deviation, gap.max_deviation());
            ++check.instances;
        }
        report.checks.push_back(check);
    }

    {
        ValidationCheck check{"time reversal is an involution", 0, 0.0, kThreshold, "entrywise"};
        for (std::size_t k = 0; k < instances; ++k) {
            const auto chain = random_irreducible_chain(pick_size(rng, max_n), rng);
            const auto mu = stationary_distribution(chain);
            const auto twice = time_reversal(time_reversal(chain, mu), mu);
            double gap = 0.0;
            for (std::size_t s = 0; s < chain.size(); ++s) {
                for (const auto& e : chain.row(s)) gap = std::max(gap, std::abs(e.prob - twice.at(s, e.state)));
                for (const auto& e : twice.row(s)) gap = std::max(gap, std::abs(e.prob - chain.at(s, e.state)));
            }
            check.max_deviation = std::max(check.max_deviation, gap);
            ++check.instances;
        }
        report.checks.push_back(check);
    }

    {
        ValidationCheck check{"sticky walk detailed balance", 0, 0.0, 1e-12, "closed-form stationary law"};
        for (std::size_t k = 0; k < instances; ++k) {
            const std::size_t n = std::max<std::size_t>(2, pick_size(rng, max_n));
            UndirectedGraph graph;
            if (n < 5) {
                std::vector<std::pair<std::size_t, std::size_t>> path;
                for (std::size_t x = 0; x + 1 < n; ++x) path.emplace_back(x, x + 1);
                graph = UndirectedGraph(n, path);
            } else {
                graph = pa_graph(n, 2, rng());
            }
            StickyWalkModel model{graph, initial_alpha(n, 0.0, kAlphaMax, rng()), std::vector<double>(n, 1.0), 0.1, 0.9};
            const auto built = build_chain(model);
            const auto mu = closed_form_stationary(model);
            check.max_deviation = std::max(check.max_deviation, detailed_balance_gap(built.chain, mu));
            ++check.instances;
        }
        report.checks.push_back(check);
    }
    return report;
}

} // namespace revrank
