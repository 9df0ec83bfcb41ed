#include "revrank/random_chains.hpp"

#include "revrank/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace revrank {
namespace {

using Rows = std::vector<std::map<std::size_t, double>>;

double weight(SplitMix64& rng) { return rng.uniform(0.05, 1.0); }

std::vector<std::size_t> shuffled(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return perm;
}

// Strongly connected random structure on `states`.
void add_irreducible_block(Rows& rows, const std::vector<std::size_t>& states, SplitMix64& rng, double extra) {
    const std::size_t n = states.size();
    if (n == 1) return;
    const auto perm = shuffled(n, rng);
    for (std::size_t i = 0; i < n; ++i) rows[states[perm[i]]][states[perm[(i + 1) % n]]] += weight(rng);
    const auto max_extra = static_cast<std::uint64_t>(2.0 * extra) + 1;
    for (auto s : states) {
        const auto count = rng.below(max_extra);
        for (std::uint64_t k = 0; k < count; ++k) rows[s][states[rng.below(n)]] += weight(rng);
    }
}

SparseChain normalise(const Rows& rows) {
    std::vector<Transition> transitions;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        double total = 0.0;
        for (const auto& [t, w] : rows[s]) total += w;
        for (const auto& [t, w] : rows[s]) transitions.push_back({s, t, w / total});
    }
    return SparseChain(rows.size(), std::move(transitions));
}

} // namespace

SparseChain random_irreducible_chain(std::size_t n, SplitMix64& rng, double extra_per_state) {
    if (n == 0) throw DomainError("random_irreducible_chain: n must be positive");
    Rows rows(n);
    std::vector<std::size_t> states(n);
    std::iota(states.begin(), states.end(), 0);
    if (n == 1) rows[0][0] = 1.0;
    add_irreducible_block(rows, states, rng, extra_per_state);
    return normalise(rows);
}

SparseChain random_reducible_chain(std::size_t max_n, std::size_t max_classes, SplitMix64& rng) {
    if (max_n == 0 || max_classes == 0) throw DomainError("random_reducible_chain: empty request");
    const std::size_t k = 1 + rng.below(std::min(max_classes, max_n));

    std::vector<std::size_t> sizes(k);
    const std::size_t budget = max_n / k;
    for (auto& size : sizes) size = rng.uniform() < 0.25 ? 1 : 1 + rng.below(budget);
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});

    // Random labels so classes are not contiguous index ranges.
    const auto label = shuffled(n, rng);
    std::vector<std::vector<std::size_t>> members(k);
    std::size_t next = 0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i) members[c].push_back(label[next++]);
    }

    Rows rows(n);
    for (std::size_t c = 0; c < k; ++c) {
        const bool leaks = c + 1 < k && rng.uniform() < 0.6;
        if (sizes[c] == 1 && (!leaks || rng.uniform() < 0.5)) rows[members[c][0]][members[c][0]] += weight(rng);
        add_irreducible_block(rows, members[c], rng, 1.5);
        if (!leaks) continue;

        bool any = false;
        for (std::size_t i = 0; i < sizes[c]; ++i) {
            const bool last = i + 1 == sizes[c];
            if (!(rng.uniform() < 0.5 || (last && !any))) continue;
            any = true;
            const auto edges = 1 + rng.below(2);
            for (std::uint64_t e = 0; e < edges; ++e) {
                const auto& target = members[c + 1 + rng.below(k - c - 1)];
                rows[members[c][i]][target[rng.below(target.size())]] += weight(rng);
            }
        }
    }
    return normalise(rows);
}

SparseChain random_absorbing_chain(std::size_t transient, std::size_t absorbing, SplitMix64& rng) {
    if (transient == 0 || absorbing == 0) throw DomainError("random_absorbing_chain: empty request");
    const std::size_t n = transient + absorbing;
    Rows rows(n);
    std::vector<std::size_t> states(transient);
    std::iota(states.begin(), states.end(), 0);
    if (transient == 1 && rng.uniform() < 0.5) rows[0][0] += weight(rng);
    add_irreducible_block(rows, states, rng, 1.5);

    bool any = false;
    for (std::size_t s = 0; s < transient; ++s) {
        if (!(rng.uniform() < 0.5 || (s + 1 == transient && !any))) continue;
        any = true;
        rows[s][transient + rng.below(absorbing)] += weight(rng);
    }
    for (std::size_t s = transient; s < n; ++s) rows[s][s] = 1.0;
    return normalise(rows);
}

SparseChain random_birth_death_chain(std::size_t n, SplitMix64& rng) {
    if (n == 0) throw DomainError("random_birth_death_chain: n must be positive");
    std::vector<Transition> transitions;
    for (std::size_t s = 0; s < n; ++s) {
        const double left = rng.uniform(0.1, 0.45);
        const double right = rng.uniform(0.1, 0.45);
        transitions.push_back({s, s == 0 ? n : s - 1, left});
        transitions.push_back({s, s + 1 == n ? n + 1 : s + 1, right});
        transitions.push_back({s, s, 1.0 - left - right});
    }
    transitions.push_back({n, n, 1.0});
    transitions.push_back({n + 1, n + 1, 1.0});
    return SparseChain(n + 2, std::move(transitions));
}

} // namespace revrank
