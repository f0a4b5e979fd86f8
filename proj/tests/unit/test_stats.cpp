#include "reflab/stats/aggregate.hpp"
#include "reflab/stats/agreement.hpp"
#include "reflab/stats/mannwhitney.hpp"
#include "reflab/support/errors.hpp"

#include <doctest.h>

#include <numeric>
#include <vector>

using namespace reflab;
using doctest::Approx;

TEST_CASE("agreement statistics on a mixed table") {
    stats::ContingencyTable t{20, 5, 10, 15};
    auto s = stats::agreement(t);
    CHECK(s.p_o == Approx(0.7));
    REQUIRE(s.kappa.has_value());
    CHECK(*s.kappa == Approx(0.4));
    REQUIRE(s.p_pos.has_value());
    CHECK(*s.p_pos == Approx(40.0 / 55.0));
    REQUIRE(s.p_neg.has_value());
    CHECK(*s.p_neg == Approx(30.0 / 45.0));
    CHECK(s.pabak == Approx(0.4));
}

TEST_CASE("agreement on the documented oracle table") {
    auto s = stats::agreement({40, 10, 5, 45});
    CHECK(s.p_o == Approx(0.85));
    REQUIRE(s.kappa.has_value());
    CHECK(*s.kappa == Approx(0.7));
    REQUIRE(s.p_pos.has_value());
    CHECK(*s.p_pos == Approx(80.0 / 95.0));
    REQUIRE(s.p_neg.has_value());
    CHECK(*s.p_neg == Approx(90.0 / 105.0));
    CHECK(s.pabak == Approx(0.7));
}

TEST_CASE("kappa is reported undefined when chance agreement saturates") {
    auto s = stats::agreement({10, 0, 0, 0});
    CHECK(s.p_o == Approx(1.0));
    CHECK_FALSE(s.kappa.has_value());
    CHECK(s.pabak == Approx(1.0));
    REQUIRE(s.p_pos.has_value());
    CHECK(*s.p_pos == Approx(1.0));
    CHECK_FALSE(s.p_neg.has_value());
}

TEST_CASE("kappa is symmetric in the raters") {
    stats::ContingencyTable t{7, 3, 12, 28};
    auto s1 = stats::agreement(t);
    auto s2 = stats::agreement(t.transposed());
    REQUIRE(s1.kappa.has_value());
    REQUIRE(s2.kappa.has_value());
    CHECK(*s1.kappa == Approx(*s2.kappa));
    CHECK(s1.p_o == Approx(s2.p_o));
}

TEST_CASE("kappa can be negative when observed agreement trails chance") {
    auto s = stats::agreement({0, 10, 10, 0});
    REQUIRE(s.kappa.has_value());
    CHECK(*s.kappa < 0.0);
    CHECK(s.pabak == Approx(-1.0));
}

TEST_CASE("empty contingency table is an error") {
    CHECK_THROWS_AS(stats::agreement({0, 0, 0, 0}), reflab::EmptyTableError);
    CHECK_THROWS_AS(stats::agreement({-1, 1, 1, 1}), reflab::EmptyTableError);
}

TEST_CASE("mann-whitney on disjoint two-element samples") {
    auto r = stats::mann_whitney_u({1, 2}, {3, 4});
    CHECK(r.u_a == Approx(0.0));
    CHECK(r.u_b == Approx(4.0));
    CHECK(r.exact);
    CHECK(r.p_two_sided == Approx(2.0 / 6.0));
    CHECK_FALSE(r.significant);
}

TEST_CASE("mann-whitney on interleaved samples") {
    auto r = stats::mann_whitney_u({1, 3}, {2, 4});
    CHECK(r.u_a + r.u_b == Approx(4.0));
    CHECK(std::min(r.u_a, r.u_b) == Approx(1.0));
    CHECK(std::max(r.u_a, r.u_b) == Approx(3.0));
    CHECK(r.p_two_sided == Approx(4.0 / 6.0));
}

TEST_CASE("mann-whitney handles fully tied samples") {
    auto r = stats::mann_whitney_u({1, 1}, {1, 1});
    CHECK(r.u_a == Approx(2.0));
    CHECK(r.u_b == Approx(2.0));
    CHECK(r.p_two_sided == Approx(1.0));
    CHECK_FALSE(r.significant);
}

TEST_CASE("mann-whitney exact p on disjoint ten-element samples") {
    std::vector<double> a(10), b(10);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 11.0);
    auto r = stats::mann_whitney_u(a, b);
    CHECK(r.exact);
    CHECK(r.u_a == Approx(0.0));
    CHECK(r.p_two_sided == Approx(1.082508822446903e-05).epsilon(1e-9));
    CHECK(r.significant);
}

TEST_CASE("mann-whitney normal approximation matches the reference values") {
    std::vector<double> a(15), b(15);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 16.0);
    auto r = stats::mann_whitney_u(a, b);
    CHECK_FALSE(r.exact);
    CHECK(r.p_two_sided == Approx(3.3918213908250945e-06).epsilon(1e-9));
    CHECK(r.significant);

    std::vector<double> c{5, 5, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17};
    std::vector<double> d{5, 5, 6, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 18};
    auto r2 = stats::mann_whitney_u(c, d);
    CHECK_FALSE(r2.exact);
    CHECK(r2.u_a == Approx(110.0));
    CHECK(r2.p_two_sided == Approx(0.9336355299651544).epsilon(1e-9));
    CHECK_FALSE(r2.significant);
}

TEST_CASE("u statistics always sum to the product of the sample sizes") {
    auto r = stats::mann_whitney_u({3, 1, 4, 1, 5}, {9, 2, 6});
    CHECK(r.u_a + r.u_b == Approx(15.0));
    CHECK(r.p_two_sided >= 0.0);
    CHECK(r.p_two_sided <= 1.0);
}

TEST_CASE("mann-whitney rejects empty samples") {
    CHECK_THROWS_AS(stats::mann_whitney_u({}, {1.0}), reflab::EmptyTableError);
    CHECK_THROWS_AS(stats::mann_whitney_u({1.0}, {}), reflab::EmptyTableError);
}

TEST_CASE("aggregate mean and population standard deviation") {
    auto ms = stats::aggregate({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(ms.mean == Approx(5.0));
    CHECK(ms.std == Approx(2.0));
    CHECK(stats::format_mean_std(ms) == "5.000±2.000");
    CHECK_THROWS_AS(stats::aggregate({}), reflab::EmptyTableError);
}

TEST_CASE("rate and table formatting") {
    CHECK(stats::success_rate(7, 10) == Approx(70.0));
    CHECK(stats::success_rate(0, 8) == Approx(0.0));
    CHECK_THROWS_AS(stats::success_rate(1, 0), reflab::UndefinedMetricError);
    CHECK_THROWS_AS(stats::success_rate(11, 10), reflab::UndefinedMetricError);
    CHECK(stats::format_one_decimal(54.0983) == "54.1");
    CHECK(stats::format_one_decimal(0.0) == "0.0");
    CHECK(stats::format_one_decimal(100.0) == "100.0");
}
