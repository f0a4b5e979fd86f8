#pragma once

#include <vector>

namespace reflab::stats {

struct MannWhitneyResult {
    double u_a = 0.0;       // rank-sum U for the first sample
    double u_b = 0.0;       // n_a*n_b - u_a
    double p_two_sided = 1.0;
    bool exact = false;      // exact permutation enumeration vs normal approximation
    bool significant = false; // p < alpha
};

// Midranks for ties. Exact enumeration over all subject-to-group assignments
// when the combined size is <= 20; otherwise normal approximation with tie
// correction and continuity correction. Throws EmptyTableError on an empty
// sample.
MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b,
                                 double alpha = 0.05);

} // namespace reflab::stats
