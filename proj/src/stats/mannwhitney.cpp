#include "reflab/stats/mannwhitney.hpp"

#include "reflab/support/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace reflab::stats {

namespace {

// Midranks of the combined sample, in the order (sample_a ++ sample_b).
std::vector<double> midranks(const std::vector<double>& combined) {
    size_t n = combined.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t x, size_t y) { return combined[x] < combined[y]; });

    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && combined[order[j + 1]] == combined[order[i]]) ++j;
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double u_from_rank_sum(double rank_sum, size_t n_a) {
    return rank_sum - static_cast<double>(n_a) * (static_cast<double>(n_a) + 1.0) / 2.0;
}

// P(|U' - mu| >= |U_obs - mu|) over all assignments of the pooled ranks to
// group A. Valid under ties because it permutes the observed midranks.
double exact_two_sided_p(const std::vector<double>& ranks, size_t n_a, double u_obs) {
    size_t n = ranks.size();
    double mu = static_cast<double>(n_a) * static_cast<double>(n - n_a) / 2.0;
    double threshold = std::abs(u_obs - mu) - 1e-12;

    unsigned long long total = 0;
    unsigned long long extreme = 0;
    std::vector<size_t> pick(n_a);
    for (size_t i = 0; i < n_a; ++i) pick[i] = i;

    while (true) {
        double rank_sum = 0.0;
        for (size_t idx : pick) rank_sum += ranks[idx];
        double u = u_from_rank_sum(rank_sum, n_a);
        ++total;
        if (std::abs(u - mu) >= threshold) ++extreme;

        // next combination in lexicographic order
        size_t k = n_a;
        while (k > 0) {
            --k;
            if (pick[k] != k + n - n_a) {
                ++pick[k];
                for (size_t j = k + 1; j < n_a; ++j) pick[j] = pick[j - 1] + 1;
                break;
            }
            if (k == 0) return static_cast<double>(extreme) / static_cast<double>(total);
        }
    }
}

double normal_two_sided_p(const std::vector<double>& combined, size_t n_a, double u_obs) {
    size_t n = combined.size();
    size_t n_b = n - n_a;
    double mu = static_cast<double>(n_a) * static_cast<double>(n_b) / 2.0;

    std::map<double, size_t> tie_groups;
    for (double v : combined) ++tie_groups[v];
    double tie_term = 0.0;
    for (const auto& [value, t] : tie_groups) {
        double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    double nd = static_cast<double>(n);
    double variance = (static_cast<double>(n_a) * static_cast<double>(n_b) / 12.0) *
                      ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (variance <= 0.0) return 1.0;

    double dev = u_obs - mu;
    double continuity = dev > 0 ? -0.5 : dev < 0 ? 0.5 : 0.0;
    double z = (dev + continuity) / std::sqrt(variance);
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

} // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b, double alpha) {
    if (sample_a.empty() || sample_b.empty())
        throw EmptyTableError("mann_whitney_u requires two nonempty samples");

    std::vector<double> combined = sample_a;
    combined.insert(combined.end(), sample_b.begin(), sample_b.end());
    std::vector<double> ranks = midranks(combined);

    double rank_sum_a = 0.0;
    for (size_t i = 0; i < sample_a.size(); ++i) rank_sum_a += ranks[i];

    MannWhitneyResult result;
    result.u_a = u_from_rank_sum(rank_sum_a, sample_a.size());
    result.u_b = static_cast<double>(sample_a.size()) * sample_b.size() - result.u_a;

    if (combined.size() <= 20) {
        result.exact = true;
        result.p_two_sided = exact_two_sided_p(ranks, sample_a.size(), result.u_a);
    } else {
        result.exact = false;
        result.p_two_sided = normal_two_sided_p(combined, sample_a.size(), result.u_a);
    }
    result.p_two_sided = std::min(1.0, result.p_two_sided);
    result.significant = result.p_two_sided < alpha;
    return result;
}

} // namespace reflab::stats
