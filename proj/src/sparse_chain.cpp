#include "revrank/sparse_chain.hpp"

#include "revrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace revrank {

SparseChain::SparseChain(std::size_t n, std::vector<Transition> transitions) : n_(n) {
    std::sort(transitions.begin(), transitions.end(), [](const Transition& a, const Transition& b) {
        return a.source != b.source ? a.source < b.source : a.target < b.target;
    });

    row_ptr_.assign(n + 1, 0);
    col_ptr_.assign(n + 1, 0);
    row_sums_.assign(n, 0.0);
    targets_.reserve(transitions.size());

    for (std::size_t k = 0; k < transitions.size(); ++k) {
        const auto& t = transitions[k];
        if (t.source >= n || t.target >= n) {
            throw DomainError("transition " + std::to_string(t.source) + " -> " +
                              std::to_string(t.target) + " out of range for n = " + std::to_string(n));
        }
        if (!(t.prob > 0.0) || t.prob > 1.0 + kRowSumTolerance || !std::isfinite(t.prob)) {
            throw DomainError("probability outside (0, 1] on transition " + std::to_string(t.source) +
                              " -> " + std::to_string(t.target));
        }
        if (k > 0 && transitions[k - 1].source == t.source && transitions[k - 1].target == t.target) {
            throw DomainError("duplicate transition " + std::to_string(t.source) + " -> " +
                              std::to_string(t.target));
        }
        targets_.push_back({t.target, t.prob});
        ++row_ptr_[t.source + 1];
        ++col_ptr_[t.target + 1];
        row_sums_[t.source] += t.prob;
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
    std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());

    for (std::size_t s = 0; s < n; ++s) {
        if (row_sums_[s] > 1.0 + kRowSumTolerance) {
            throw DomainError("row " + std::to_string(s) + " sums to " + std::to_string(row_sums_[s]) +
                              " > 1");
        }
        if (std::abs(row_sums_[s] - 1.0) > kRowSumTolerance) stochastic_ = false;
    }

    // Rows are visited in source order, so each column comes out sorted by source.
    sources_.resize(targets_.size());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& e : row(s)) sources_[fill[e.state]++] = {s, e.prob};
    }
}

SparseChain SparseChain::from_dense(const std::vector<std::vector<double>>& rows) {
    std::vector<Transition> transitions;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != rows.size()) throw DomainError("dense matrix is not square");
        for (std::size_t t = 0; t < rows[s].size(); ++t) {
            if (rows[s][t] != 0.0) transitions.push_back({s, t, rows[s][t]});
        }
    }
    return SparseChain(rows.size(), std::move(transitions));
}

double SparseChain::at(std::size_t s, std::size_t t) const noexcept {
    const auto r = row(s);
    const auto it = std::lower_bound(r.begin(), r.end(), t,
                                     [](const Entry& e, std::size_t target) { return e.state < target; });
    return (it != r.end() && it->state == t) ? it->prob : 0.0;
}

double SparseChain::self_loop(std::size_t s) const noexcept { return at(s, s); }

void SparseChain::left_multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t t = 0; t < n_; ++t) {
        double acc = 0.0;
        for (const auto& e : column(t)) acc += x[e.state] * e.prob;
        y[t] = acc;
    }
}

void SparseChain::right_multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t s = 0; s < n_; ++s) {
        double acc = 0.0;
        for (const auto& e : row(s)) acc += e.prob * x[e.state];
        y[s] = acc;
    }
}

SparseChain SparseChain::restricted(std::span<const std::size_t> states) const {
    constexpr auto absent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> local(n_, absent);
    for (std::size_t i = 0; i < states.size(); ++i) local[states[i]] = i;

    std::vector<Transition> kept;
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (const auto& e : row(states[i])) {
            if (local[e.state] != absent) kept.push_back({i, local[e.state], e.prob});
        }
    }
    return SparseChain(states.size(), std::move(kept));
}

SparseChain SparseChain::renormalized() const {
    std::vector<Transition> scaled;
    scaled.reserve(nnz());
    for (std::size_t s = 0; s < n_; ++s) {
        for (const auto& e : row(s)) scaled.push_back({s, e.state, e.prob / row_sums_[s]});
    }
    return SparseChain(n_, std::move(scaled));
}

std::vector<Transition> SparseChain::transitions() const {
    std::vector<Transition> out;
    out.reserve(nnz());
    for (std::size_t s = 0; s < n_; ++s) {
        for (const auto& e : row(s)) out.push_back({s, e.state, e.prob});
    }
    return out;
}

Distribution Distribution::probability(std::vector<double> values, double tol) {
    double total = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("distribution has a negative or non-finite entry");
        total += v;
    }
    if (std::abs(total - 1.0) > tol) {
        throw DomainError("distribution sums to " + std::to_string(total) + ", expected 1");
    }
    return Distribution{std::move(values)};
}

Distribution Distribution::uniform(std::size_t n) {
    return Distribution{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

double Distribution::sum() const noexcept { return std::accumulate(values.begin(), values.end(), 0.0); }

SparseChain read_chain(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw DomainError("chain file: missing `n m` header");
    std::vector<Transition> transitions;
    transitions.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        Transition t{};
        if (!(in >> t.source >> t.target >> t.prob)) {
            throw DomainError("chain file: expected " + std::to_string(m) + " transitions, read " +
                              std::to_string(k));
        }
        transitions.push_back(t);
    }
    return SparseChain(n, std::move(transitions));
}

void write_chain(std::ostream& out, const SparseChain& chain) {
    std::ostringstream buf;
    buf.precision(17);
    buf << chain.size() << ' ' << chain.nnz() << '\n';
    for (std::size_t s = 0; s < chain.size(); ++s) {
        for (const auto& e : chain.row(s)) buf << s << ' ' << e.state << ' ' << e.prob << '\n';
    }
    out << buf.str();
}

} // namespace revrank
