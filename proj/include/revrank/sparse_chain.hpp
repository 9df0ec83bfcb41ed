#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace revrank {

/// One stored transition (source -> target with probability prob).
struct Transition {
    std::size_t source;
    std::size_t target;
    double prob;
};

/// Row-compressed sparse nonnegative matrix with row sums at most one.
///
/// Holds transition matrices, their time reversals, and the substochastic
/// blocks of reducible chains. Rows are kept in strictly increasing target
/// order and an explicit transposed copy (in-edges) is stored alongside,
/// since reversal, residual pushes and prioritized sweeping all walk
/// columns. Immutable after construction.
class SparseChain {
public:
    /// A (state, probability) pair. `state` is the target in a row view and
    /// the source in a column view.
    struct Entry {
        std::size_t state;
        double prob;
    };

    /// Slack allowed on row sums and on individual probabilities.
    static constexpr double kRowSumTolerance = 1e-12;

    SparseChain() = default;

    /// Builds and validates. Transitions may come in any order; duplicates,
    /// out-of-range states, probabilities outside (0, 1] and row sums above
    /// 1 + kRowSumTolerance raise DomainError.
    SparseChain(std::size_t n, std::vector<Transition> transitions);

    /// Dense row-major convenience constructor; zeros are skipped.
    static SparseChain from_dense(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return targets_.size(); }

    std::span<const Entry> row(std::size_t s) const noexcept {
        return {targets_.data() + row_ptr_[s], targets_.data() + row_ptr_[s + 1]};
    }
    std::span<const Entry> column(std::size_t s) const noexcept {
        return {sources_.data() + col_ptr_[s], sources_.data() + col_ptr_[s + 1]};
    }
    std::size_t out_degree(std::size_t s) const noexcept { return row_ptr_[s + 1] - row_ptr_[s]; }
    std::size_t in_degree(std::size_t s) const noexcept { return col_ptr_[s + 1] - col_ptr_[s]; }

    double row_sum(std::size_t s) const noexcept { return row_sums_[s]; }
    std::span<const double> row_sums() const noexcept { return row_sums_; }

    /// P(s, s), zero when not stored.
    double self_loop(std::size_t s) const noexcept;

    /// P(s, t), zero when not stored.
    double at(std::size_t s, std::size_t t) const noexcept;

    /// Every row sum within kRowSumTolerance of one.
    bool is_stochastic() const noexcept { return stochastic_; }

    /// y = x P, i.e. y(t) = sum_s x(s) P(s, t).
    void left_multiply(std::span<const double> x, std::span<double> y) const;

    /// y = P x, i.e. y(s) = sum_t P(s, t) x(t).
    void right_multiply(std::span<const double> x, std::span<double> y) const;

    /// Submatrix on `states` (in the given order), reindexed 0..k-1.
    /// Mass leaving the subset is dropped, so the result is substochastic.
    SparseChain restricted(std::span<const std::size_t> states) const;

    /// Each nonempty row divided by its sum. Only on explicit request.
    SparseChain renormalized() const;

    std::vector<Transition> transitions() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<Entry> targets_;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<Entry> sources_;
    std::vector<double> row_sums_;
    bool stochastic_ = true;
};

/// Dense nonnegative vector, optionally a probability distribution.
struct Distribution {
    std::vector<double> values;

    /// Validates nonnegativity and |sum - 1| <= tol.
    static Distribution probability(std::vector<double> values, double tol = 1e-10);

    /// Uniform on n states.
    static Distribution uniform(std::size_t n);

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    double sum() const noexcept;
};

/// Chain text format: header `n m`, then m lines `src dst prob`
/// (0-based). Probabilities are written with 17 significant digits so a
/// write/read cycle reproduces the matrix exactly.
SparseChain read_chain(std::istream& in);
void write_chain(std::ostream& out, const SparseChain& chain);

} // namespace revrank
