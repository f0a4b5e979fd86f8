#pragma once

#include <optional>

namespace reflab::stats {

// Two-rater binary contingency table.
//   a = both positive, b = rater1 positive only,
//   c = rater2 positive only, d = both negative.
struct ContingencyTable {
    long long a = 0;
    long long b = 0;
    long long c = 0;
    long long d = 0;

    long long n() const { return a + b + c + d; }
    ContingencyTable transposed() const { return {a, c, b, d}; }
};

struct AgreementStats {
    double p_o = 0.0;
    std::optional<double> kappa;   // absent when p_e = 1 (chance agreement saturates)
    std::optional<double> p_pos;   // absent when 2a+b+c = 0
    std::optional<double> p_neg;   // absent when 2d+b+c = 0
    double pabak = 0.0;            // 2*p_o - 1, always defined
};

// Throws EmptyTableError when n = 0. An undefined kappa is reported as an
// empty optional, never coerced to 0.
AgreementStats agreement(const ContingencyTable& table);

} // namespace reflab::stats
