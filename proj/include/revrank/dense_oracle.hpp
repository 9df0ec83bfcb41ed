#pragma once

#include "revrank/sparse_chain.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace revrank::dense {

// Dense reference computations. Cubic cost; meant for n up to a few hundred.

Eigen::MatrixXd to_dense(const SparseChain& chain);

/// Solves (I - gamma P) v = r by LU with partial pivoting.
std::vector<double> value(const SparseChain& chain, double gamma, std::span<const double> reward);

/// gamma = 1: v = (I - Q)^{-1} r on the states outside closed classes,
/// 0 on closed classes.
std::vector<double> absorbing_value(const SparseChain& chain, std::span<const double> reward);

/// Left null vector of I - P, normalised to sum one.
std::vector<double> stationary(const SparseChain& chain);

/// w = (1 - c) u (I - c M)^{-1}.
std::vector<double> pagerank(const SparseChain& matrix, double c, std::span<const double> restart);

/// max |a - b| / max |b|; plain max |a - b| when b vanishes.
double relative_linf(std::span<const double> a, std::span<const double> b);

/// Eigenvalues, sorted by decreasing modulus then by argument.
std::vector<std::complex<double>> spectrum(const SparseChain& chain);

} // namespace revrank::dense
