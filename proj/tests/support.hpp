#pragma once

#include "revrank/sparse_chain.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

// 0 -> 1 -> 2 -> 0
inline revrank::SparseChain cycle3() { return revrank::SparseChain::from_dense({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}); }

// 0 -> 2 -> 1 -> 0
inline revrank::SparseChain reversed_cycle3() {
    return revrank::SparseChain::from_dense({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}});
}

inline revrank::SparseChain two_state() { return revrank::SparseChain::from_dense({{0.5, 0.5}, {0.25, 0.75}}); }

inline double linf(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double max_entry_gap(const revrank::SparseChain& a, const revrank::SparseChain& b) {
    double d = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        for (const auto& e : a.row(s)) d = std::max(d, std::abs(e.prob - b.at(s, e.state)));
        for (const auto& e : b.row(s)) d = std::max(d, std::abs(e.prob - a.at(s, e.state)));
    }
    return d;
}

// CSV text with the last column (wall-clock time) removed from every line.
inline std::string drop_last_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(','));
        out += '\n';
    }
    return out;
}

} // namespace testing
