#pragma once

#include "revrank/sparse_chain.hpp"

#include <cstddef>
#include <vector>

namespace revrank {

struct SpectralOptions {
    /// Entrywise relative tolerance on the eigen-equation residual.
    double tol = 1e-12;
    std::size_t max_sweeps = 1'000'000;
};

/// Stationary law of an irreducible stochastic chain by power iteration.
///
/// Converged when |(mu P)(s) - mu(s)| <= tol * mu(s) for every s, which in
/// particular bounds ||mu P - mu||_1 by tol. Periodic chains are iterated
/// through the lazy chain (P + I) / 2, which has the same stationary law.
/// Throws DomainError for non-stochastic or reducible input and
/// ConvergenceError (carrying the residual reached) past max_sweeps.
Distribution stationary_distribution(const SparseChain& chain, const SpectralOptions& options = {});

/// max_s |(mu P)(s) - mu(s)| / mu(s).
double stationarity_residual(const SparseChain& chain, const Distribution& mu);

/// Period of the strongly connected chain reachable from state 0
/// (gcd of cycle lengths). 1 means aperiodic.
std::size_t chain_period(const SparseChain& chain);

/// P*(s, t) = mu(t) P(t, s) / mu(s). Throws DomainError if mu has a zero
/// entry or the result violates the row-sum bound.
SparseChain time_reversal(const SparseChain& chain, const Distribution& mu);

/// max over transitions of |mu(s) P(s, t) - mu(t) P(t, s)|. Zero exactly for reversible chains.
double detailed_balance_gap(const SparseChain& chain, const Distribution& mu);

enum class ClassKind { Transient, Recurrent };

struct CommunicatingClass {
    std::vector<std::size_t> states;      // ascending
    ClassKind kind = ClassKind::Recurrent;
    std::vector<std::size_t> downstream;  // classes reached by one transition, ascending
    std::size_t cross_edges = 0;          // transitions leaving the class
};

/// Communicating classes listed in an order under which every transition
/// stays within a class or goes to a later class. Transient classes come
/// first (topologically sorted), closed classes last. A class is Recurrent
/// iff no transition leaves it.
struct ClassDecomposition {
    std::vector<CommunicatingClass> classes;
    std::vector<std::size_t> class_of;    // state -> index into classes

    std::size_t transient_count() const noexcept;
};

ClassDecomposition scc_decompose(const SparseChain& chain);

bool is_irreducible(const SparseChain& chain);

/// Perron data of an irreducible substochastic block Q:
/// Q h = lambda h, nu Q = lambda nu, sum nu = 1, nu . h = 1.
struct SpectralTriple {
    double lambda = 0.0;
    Distribution nu;
    std::vector<double> h;
};

/// Simultaneous normalized power iterations for nu (on the columns of Q)
/// and h (on the rows). When the residual stops improving for ten sweeps
/// the iteration switches to the shifted matrix (Q + lambda I) to break
/// periodic oscillation. Throws DomainError when Q is stochastic or not
/// irreducible.
SpectralTriple quasi_stationary(const SparseChain& q, const SpectralOptions& options = {});

/// Doob h-transform Q~(s, t) = Q(s, t) h(t) / (lambda h(s)); stochastic,
/// with stationary law nu * h.
SparseChain doob_transform(const SparseChain& q, const SpectralTriple& triple);

/// Time reversal of the Doob transform, Q~*(s, t) = nu(t) Q(t, s) / (lambda nu(s)).
/// Does not use h.
SparseChain reversed_doob(const SparseChain& q, const SpectralTriple& triple);

} // namespace revrank
