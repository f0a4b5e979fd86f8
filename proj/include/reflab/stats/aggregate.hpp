#pragma once

#include <string>
#include <vector>

namespace reflab::stats {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population standard deviation
};

// Throws EmptyTableError on an empty input.
MeanStd aggregate(const std::vector<double>& values);

// 100 * successes / attempts. Throws UndefinedMetricError when attempts = 0
// or successes > attempts.
double success_rate(long long successes, long long attempts);

// One-decimal rendering used by the report tables: 54.0983.. -> "54.1".
std::string format_one_decimal(double value);

// "m±s" with three decimals on both sides.
std::string format_mean_std(const MeanStd& ms);

} // namespace reflab::stats
