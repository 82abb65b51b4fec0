#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "happyreg/distributions.hpp"
#include "happyreg/format.hpp"
#include "oracles.hpp"

using namespace happyreg;

TEST(NormalCdf, SymmetryAndQuantiles) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.959964), 0.975, 1e-6);
    for (double x : {0.1, 0.7, 1.5, 3.0, 6.0})
        EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-14);
}

TEST(NormalCdf, MonotoneInOpenUnitInterval) {
    double prev = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        const double p = normal_cdf(x);
        EXPECT_GT(p, prev);
        EXPECT_LT(p, 1.0);
        prev = p;
    }
}

TEST(NormalQuantile, AgreesWithBisection) {
    for (double p : {0.001, 0.025, 0.13, 0.25, 0.5, 0.68, 0.75, 0.975, 0.999})
        EXPECT_NEAR(normal_quantile(p), oracle::inverse_normal_bisect(p), 1e-10);
}

TEST(TDistribution, ClosedForms) {
    for (double df : {1.0, 3.0, 30.0})
        EXPECT_DOUBLE_EQ(t_distribution_sf(0.0, df), 0.5);
    EXPECT_NEAR(t_distribution_sf(1.0, 1.0), 0.25, 1e-14);
    // Cauchy: sf(t) = 1/2 - atan(t)/pi.
    for (double t : {-3.0, 0.5, 2.0, 10.0})
        EXPECT_NEAR(t_distribution_sf(t, 1.0), 0.5 - std::atan(t) / std::numbers::pi, 1e-13);
    // df = 2: sf(t) = (1 - t / sqrt(t^2 + 2)) / 2.
    for (double t : {-1.0, 0.3, 4.0})
        EXPECT_NEAR(t_distribution_sf(t, 2.0), 0.5 * (1.0 - t / std::sqrt(t * t + 2.0)), 1e-13);
}

TEST(TDistribution, TwoSidedAndLimits) {
    EXPECT_NEAR(t_two_sided_p(2.0, 10.0), 2.0 * t_distribution_sf(2.0, 10.0), 1e-15);
    EXPECT_NEAR(t_two_sided_p(-2.0, 10.0), t_two_sided_p(2.0, 10.0), 1e-15);
    EXPECT_EQ(t_two_sided_p(INFINITY, 5.0), 0.0);
    EXPECT_NEAR(t_distribution_sf(1.959964, 1e9), 0.025, 1e-6);
    EXPECT_THROW(t_distribution_sf(NAN, 3.0), std::exception);
}

TEST(FDistribution, MatchesSquaredT) {
    // F(1, d) is t(d)^2.
    for (double t : {0.5, 1.3, 2.7})
        EXPECT_NEAR(f_distribution_sf(t * t, 1.0, 12.0), 2.0 * t_distribution_sf(t, 12.0), 1e-12);
    EXPECT_DOUBLE_EQ(f_distribution_sf(0.0, 7.0, 15.0), 1.0);
    // F(2, d2) has sf (1 + 2f/d2)^(-d2/2).
    EXPECT_NEAR(f_distribution_sf(3.0, 2.0, 10.0), std::pow(1.0 + 0.6, -5.0), 1e-13);
}

TEST(Format, SignificantDigits) {
    EXPECT_EQ(format_sig(-0.0913312), "-0.0913312");
    EXPECT_EQ(format_sig(2.190973), "2.190973");
    EXPECT_EQ(format_sig(32701.0), "32701");
    EXPECT_EQ(format_sig(NAN), ".");
    EXPECT_EQ(format_fixed(-5.3724, 2), "-5.37");
    double v = 0.0;
    EXPECT_TRUE(parse_double(format_exact(0.1 + 0.2), v));
    EXPECT_EQ(v, 0.1 + 0.2);
    EXPECT_FALSE(parse_double("1.5x", v));
    long i = 0;
    EXPECT_TRUE(parse_int("-12", i));
    EXPECT_EQ(i, -12);
    EXPECT_FALSE(parse_int("3.0", i));
}
