#include "reflab/stats/aggregate.hpp"

#include "reflab/support/errors.hpp"

#include <cmath>
#include <cstdio>

namespace reflab::stats {

MeanStd aggregate(const std::vector<double>& values) {
    if (values.empty()) throw EmptyTableError("aggregate requires at least one value");
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

double success_rate(long long successes, long long attempts) {
    if (attempts <= 0)
        throw UndefinedMetricError("success_rate is undefined for zero attempts");
    if (successes < 0 || successes > attempts)
        throw UndefinedMetricError("successes must lie in [0, attempts]");
    return 100.0 * static_cast<double>(successes) / static_cast<double>(attempts);
}

std::string format_one_decimal(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

std::string format_mean_std(const MeanStd& ms) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f±%.3f", ms.mean, ms.std);
    return buf;
}

} // namespace reflab::stats
