#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace revrank {

struct ValidationCheck {
    std::string name;
    std::size_t instances = 0;
    double max_deviation = 0.0;
    double threshold = 0.0;
    std::string note;

    bool passed() const noexcept { return max_deviation <= threshold; }
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    std::size_t skipped_classes = 0;  // zero-reward classes seen by the reductions

    bool passed() const;
    std::string to_text() const;
};

/// Compares every reduction against its dense oracle on random instances
/// with at most max_n states: irreducible and decomposed discounted
/// evaluation, undiscounted absorbing evaluation, resolvent adjointness,
/// time-reversal involution and sticky-walk detailed balance.
ValidationReport validate_suite(std::size_t max_n, std::uint64_t seed, std::size_t instances = 20);

} // namespace revrank
