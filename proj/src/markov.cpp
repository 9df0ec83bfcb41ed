#include "revrank/markov.hpp"

#include "revrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

namespace revrank {
namespace {

constexpr auto kUnset = static_cast<std::size_t>(-1);

double normalize_sum(std::vector<double>& x) {
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    for (auto& v : x) v /= total;
    return total;
}

// max_s |a(s) - scale * b(s)| / b(s); b is positive.
double relative_gap(const std::vector<double>& a, const std::vector<double>& b, double scale) {
    double worst = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        const double gap = std::abs(a[s] - scale * b[s]);
        if (gap == 0.0) continue;
        worst = std::max(worst, b[s] > 0.0 ? gap / (scale * b[s]) : HUGE_VAL);
    }
    return worst;
}

// Iterative Tarjan. Components come out sinks first.
std::vector<std::vector<std::size_t>> tarjan(const SparseChain& chain) {
    const std::size_t n = chain.size();
    std::vector<std::size_t> index(n, kUnset), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> calls;  // (state, next edge)
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        calls.emplace_back(root, 0);

        while (!calls.empty()) {
            auto& [v, pos] = calls.back();
            const auto row = chain.row(v);
            if (pos < row.size()) {
                const std::size_t w = row[pos++].state;
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    calls.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::size_t done = v;
            calls.pop_back();
            if (low[done] == index[done]) {
                std::vector<std::size_t> component;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component.push_back(w);
                } while (w != done);
                std::sort(component.begin(), component.end());
                components.push_back(std::move(component));
            }
            if (!calls.empty()) {
                const std::size_t parent = calls.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    return components;
}

} // namespace

std::size_t ClassDecomposition::transient_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(classes.begin(), classes.end(), [](const auto& c) {
        return c.kind == ClassKind::Transient;
    }));
}

ClassDecomposition scc_decompose(const SparseChain& chain) {
    auto components = tarjan(chain);
    std::reverse(components.begin(), components.end());  // now topological

    const std::size_t n = chain.size();
    std::vector<std::size_t> component_of(n);
    for (std::size_t c = 0; c < components.size(); ++c) {
        for (auto s : components[c]) component_of[s] = c;
    }

    std::vector<CommunicatingClass> topo(components.size());
    for (std::size_t c = 0; c < components.size(); ++c) {
        auto& cls = topo[c];
        cls.states = std::move(components[c]);
        for (auto s : cls.states) {
            for (const auto& e : chain.row(s)) {
                const std::size_t d = component_of[e.state];
                if (d == c) continue;
                ++cls.cross_edges;
                cls.downstream.push_back(d);
            }
        }
        cls.kind = cls.cross_edges == 0 ? ClassKind::Recurrent : ClassKind::Transient;
    }

    // Closed classes have no out-edges, so moving them behind every
    // transient class keeps the order topological.
    std::vector<std::size_t> order(topo.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t c) { return topo[c].kind == ClassKind::Transient; });
    std::vector<std::size_t> position(topo.size());
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;

    ClassDecomposition out;
    out.class_of.resize(n);
    out.classes.reserve(topo.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto cls = std::move(topo[order[i]]);
        for (auto& d : cls.downstream) d = position[d];
        std::sort(cls.downstream.begin(), cls.downstream.end());
        cls.downstream.erase(std::unique(cls.downstream.begin(), cls.downstream.end()), cls.downstream.end());
        for (auto s : cls.states) out.class_of[s] = i;
        out.classes.push_back(std::move(cls));
    }
    return out;
}

bool is_irreducible(const SparseChain& chain) {
    if (chain.size() == 0) return false;
    return tarjan(chain).size() == 1;
}

std::size_t chain_period(const SparseChain& chain) {
    const std::size_t n = chain.size();
    if (n == 0) return 1;
    std::vector<std::size_t> level(n, kUnset);
    std::queue<std::size_t> frontier;
    level[0] = 0;
    frontier.push(0);
    while (!frontier.empty()) {
        const auto s = frontier.front();
        frontier.pop();
        for (const auto& e : chain.row(s)) {
            if (level[e.state] == kUnset) {
                level[e.state] = level[s] + 1;
                frontier.push(e.state);
            }
        }
    }
    std::size_t g = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (level[s] == kUnset) continue;
        for (const auto& e : chain.row(s)) {
            const auto a = level[s] + 1, b = level[e.state];
            g = std::gcd(g, a > b ? a - b : b - a);
        }
    }
    return g == 0 ? 1 : g;
}

double stationarity_residual(const SparseChain& chain, const Distribution& mu) {
    std::vector<double> next(chain.size());
    chain.left_multiply(mu.values, next);
    return relative_gap(next, mu.values, 1.0);
}

Distribution stationary_distribution(const SparseChain& chain, const SpectralOptions& options) {
    const std::size_t n = chain.size();
    if (n == 0) throw DomainError("stationary_distribution: empty chain");
    if (!chain.is_stochastic()) throw DomainError("stationary_distribution: chain is not stochastic");
    if (!is_irreducible(chain)) throw DomainError("stationary_distribution: chain is not irreducible");

    const bool lazy = chain_period(chain) > 1;
    std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n);
    double residual = HUGE_VAL;
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        chain.left_multiply(x, y);
        residual = relative_gap(y, x, 1.0);
        if (residual <= options.tol) return Distribution{std::move(x)};
        if (lazy) {
            for (std::size_t s = 0; s < n; ++s) y[s] = 0.5 * (x[s] + y[s]);
        }
        normalize_sum(y);
        std::swap(x, y);
    }
    throw ConvergenceError("stationary_distribution: no convergence after " +
                               std::to_string(options.max_sweeps) + " sweeps",
                           residual);
}

SparseChain time_reversal(const SparseChain& chain, const Distribution& mu) {
    const std::size_t n = chain.size();
    if (mu.size() != n) throw DomainError("time_reversal: size mismatch");
    for (std::size_t s = 0; s < n; ++s) {
        if (!(mu[s] > 0.0)) throw DomainError("time_reversal: mu(" + std::to_string(s) + ") is not positive");
    }
    std::vector<Transition> reversed;
    reversed.reserve(chain.nnz());
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& e : chain.column(s)) {
            reversed.push_back({s, e.state, mu[e.state] * e.prob / mu[s]});
        }
    }
    return SparseChain(n, std::move(reversed));
}

double detailed_balance_gap(const SparseChain& chain, const Distribution& mu) {
    double gap = 0.0;
    for (std::size_t s = 0; s < chain.size(); ++s) {
        for (const auto& e : chain.row(s)) {
            gap = std::max(gap, std::abs(mu[s] * e.prob - mu[e.state] * chain.at(e.state, s)));
        }
    }
    return gap;
}

SpectralTriple quasi_stationary(const SparseChain& q, const SpectralOptions& options) {
    const std::size_t n = q.size();
    if (n == 0) throw DomainError("quasi_stationary: empty block");
    if (q.is_stochastic()) throw DomainError("quasi_stationary: block is stochastic (Perron value 1)");
    if (!is_irreducible(q)) throw DomainError("quasi_stationary: block is not irreducible");

    std::vector<double> nu(n, 1.0 / static_cast<double>(n)), h(n, 1.0 / static_cast<double>(n));
    std::vector<double> nu_q(n), q_h(n);
    double shift = 0.0;
    double best = HUGE_VAL;
    std::size_t since_best = 0;
    double residual = HUGE_VAL;

    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        q.left_multiply(nu, nu_q);
        q.right_multiply(h, q_h);
        const double lambda = std::accumulate(nu_q.begin(), nu_q.end(), 0.0);  // nu sums to 1
        if (!(lambda > 0.0)) throw DomainError("quasi_stationary: block has zero spectral radius");

        residual = std::max(relative_gap(nu_q, nu, lambda), relative_gap(q_h, h, lambda));
        if (residual <= options.tol) {
            SpectralTriple triple;
            triple.lambda = lambda;
            normalize_sum(nu);
            double pairing = 0.0;
            for (std::size_t s = 0; s < n; ++s) pairing += nu[s] * h[s];
            for (auto& v : h) v /= pairing;
            triple.nu = Distribution{std::move(nu)};
            triple.h = std::move(h);
            return triple;
        }

        if (residual < best) {
            best = residual;
            since_best = 0;
        } else if (++since_best >= 10 && shift == 0.0) {
            shift = lambda;  // oscillating: iterate Q + lambda I instead
            best = HUGE_VAL;
            since_best = 0;
        }

        for (std::size_t s = 0; s < n; ++s) {
            nu_q[s] += shift * nu[s];
            q_h[s] += shift * h[s];
        }
        normalize_sum(nu_q);
        normalize_sum(q_h);
        std::swap(nu, nu_q);
        std::swap(h, q_h);
    }
    throw ConvergenceError("quasi_stationary: no convergence after " + std::to_string(options.max_sweeps) +
                               " sweeps",
                           residual);
}

SparseChain doob_transform(const SparseChain& q, const SpectralTriple& triple) {
    std::vector<Transition> out;
    out.reserve(q.nnz());
    for (std::size_t s = 0; s < q.size(); ++s) {
        for (const auto& e : q.row(s)) {
            out.push_back({s, e.state, e.prob * triple.h[e.state] / (triple.lambda * triple.h[s])});
        }
    }
    return SparseChain(q.size(), std::move(out));
}

SparseChain reversed_doob(const SparseChain& q, const SpectralTriple& triple) {
    const auto& nu = triple.nu;
    std::vector<Transition> out;
    out.reserve(q.nnz());
    for (std::size_t s = 0; s < q.size(); ++s) {
        for (const auto& e : q.column(s)) {
            out.push_back({s, e.state, nu[e.state] * e.prob / (triple.lambda * nu[s])});
        }
    }
    return SparseChain(q.size(), std::move(out));
}

} // namespace revrank
