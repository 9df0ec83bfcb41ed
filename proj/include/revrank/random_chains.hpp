#pragma once

#include "revrank/rng.hpp"
#include "revrank/sparse_chain.hpp"

#include <cstddef>
#include <vector>

namespace revrank {

/// Random irreducible stochastic chain on n states: a random Hamiltonian
/// cycle plus about `extra_per_state` random extra transitions per row,
/// with a self-loop on some states. Weights are uniform in (0.05, 1]
/// before row normalisation.
SparseChain random_irreducible_chain(std::size_t n, SplitMix64& rng, double extra_per_state = 2.0);

/// Chain assembled from a random DAG of up to `max_classes` communicating
/// classes with at most `max_n` states in total. Every class without an
/// outgoing DAG edge is closed; the others leak into later classes.
/// Singleton classes, with and without self-loops, occur regularly.
SparseChain random_reducible_chain(std::size_t max_n, std::size_t max_classes, SplitMix64& rng);

/// One irreducible transient class of `transient` states draining into
/// `absorbing` absorbing states. Returns the chain with the transient
/// states first.
SparseChain random_absorbing_chain(std::size_t transient, std::size_t absorbing, SplitMix64& rng);

/// Random birth-death chain on the transient states 0..n-1 with absorbing
/// states n (left) and n+1 (right).
SparseChain random_birth_death_chain(std::size_t n, SplitMix64& rng);

} // namespace revrank
