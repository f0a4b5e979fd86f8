#include "reflab/stats/agreement.hpp"

#include "reflab/support/errors.hpp"

namespace reflab::stats {

AgreementStats agreement(const ContingencyTable& table) {
    long long n = table.n();
    if (n <= 0) throw EmptyTableError("agreement statistics need a nonempty table");
    if (table.a < 0 || table.b < 0 || table.c < 0 || table.d < 0)
        throw EmptyTableError("contingency counts must be nonnegative");

    double a = static_cast<double>(table.a);
    double b = static_cast<double>(table.b);
    double c = static_cast<double>(table.c);
    double d = static_cast<double>(table.d);
    double total = static_cast<double>(n);

    AgreementStats stats;
    stats.p_o = (a + d) / total;
    double p_e = ((a + b) * (a + c) + (c + d) * (b + d)) / (total * total);
    if (p_e < 1.0) stats.kappa = (stats.p_o - p_e) / (1.0 - p_e);

    if (2 * a + b + c > 0) stats.p_pos = 2 * a / (2 * a + b + c);
    if (2 * d + b + c > 0) stats.p_neg = 2 * d / (2 * d + b + c);
    stats.pabak = 2.0 * stats.p_o - 1.0;
    return stats;
}

} // namespace reflab::stats
