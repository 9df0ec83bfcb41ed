#include "revrank/dense_oracle.hpp"

#include "revrank/error.hpp"
#include "revrank/markov.hpp"

#include <algorithm>
#include <cmath>

namespace revrank::dense {
namespace {

Eigen::VectorXd to_vector(std::span<const double> x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

} // namespace

Eigen::MatrixXd to_dense(const SparseChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t s = 0; s < chain.size(); ++s) {
        for (const auto& e : chain.row(s)) m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(e.state)) = e.prob;
    }
    return m;
}

std::vector<double> value(const SparseChain& chain, double gamma, std::span<const double> reward) {
    if (reward.size() != chain.size()) throw DomainError("dense::value: reward size mismatch");
    const auto n = static_cast<Eigen::Index>(chain.size());
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - gamma * to_dense(chain);
    return to_std(a.partialPivLu().solve(to_vector(reward)));
}

std::vector<double> absorbing_value(const SparseChain& chain, std::span<const double> reward) {
    if (reward.size() != chain.size()) throw DomainError("dense::absorbing_value: reward size mismatch");
    const auto decomposition = scc_decompose(chain);
    std::vector<std::size_t> open;
    for (const auto& cls : decomposition.classes) {
        if (cls.kind == ClassKind::Transient) open.insert(open.end(), cls.states.begin(), cls.states.end());
    }
    std::vector<double> v(chain.size(), 0.0);
    if (open.empty()) return v;
    const auto q = to_dense(chain.restricted(open));
    const auto m = static_cast<Eigen::Index>(open.size());
    Eigen::VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) r(i) = reward[open[static_cast<std::size_t>(i)]];
    const Eigen::VectorXd x = (Eigen::MatrixXd::Identity(m, m) - q).partialPivLu().solve(r);
    for (Eigen::Index i = 0; i < m; ++i) v[open[static_cast<std::size_t>(i)]] = x(i);
    return v;
}

std::vector<double> stationary(const SparseChain& chain) {
    // Replace one equation of mu (I - P) = 0 by sum(mu) = 1.
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(n, n) - to_dense(chain)).transpose();
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    return to_std(a.fullPivLu().solve(b));
}

std::vector<double> pagerank(const SparseChain& matrix, double c, std::span<const double> restart) {
    const auto n = static_cast<Eigen::Index>(matrix.size());
    const Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(n, n) - c * to_dense(matrix)).transpose();
    return to_std(a.partialPivLu().solve((1.0 - c) * to_vector(restart)));
}

double relative_linf(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("relative_linf: size mismatch");
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

std::vector<std::complex<double>> spectrum(const SparseChain& chain) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(to_dense(chain), false);
    const auto& values = solver.eigenvalues();
    std::vector<std::complex<double>> out(values.data(), values.data() + values.size());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (std::abs(ma - mb) > 1e-9) return ma > mb;
        return std::arg(a) < std::arg(b);
    });
    return out;
}

} // namespace revrank::dense
