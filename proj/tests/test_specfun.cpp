#include "dipolar/specfun.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dipolar::specfun;

namespace {

// |computed - reference| <= tol * max(1, |reference|)
void expect_close(double computed, const oracle::hp& reference, double tol, const char* what, double x)
{
    const double ref = static_cast<double>(reference);
    EXPECT_LE(std::abs(computed - ref), tol * std::max(1.0, std::abs(ref)))
        << what << " at x = " << x << ": " << computed << " vs " << ref;
}

const std::vector<double> grid = oracle::logspace(1e-3, 50.0, 100);

} // namespace

TEST(BesselJ, Examples)
{
    EXPECT_EQ(bessel_j(0, 0.0), 1.0);
    EXPECT_EQ(bessel_j(1, 0.0), 0.0);
    EXPECT_NEAR(bessel_j(0, 1.0), 0.7651976866, 1e-10);
    EXPECT_THROW(bessel_j(2, 1.0), std::invalid_argument);
    EXPECT_THROW(bessel_j(0, -1.0), std::domain_error);
}

TEST(BesselJ, MatchesSeriesOracle)
{
    for (double x : grid) {
        expect_close(bessel_j(0, x), oracle::bessel_j(0, x), 1e-10, "J0", x);
        expect_close(bessel_j(1, x), oracle::bessel_j(1, x), 1e-10, "J1", x);
    }
}

TEST(ModifiedBessel, Examples)
{
    EXPECT_EQ(bessel_i0(0.0), 1.0);
    EXPECT_NEAR(bessel_k1(1.0), 0.6019072302, 1e-10);
    EXPECT_THROW(bessel_k1(0.0), std::domain_error);
}

TEST(ModifiedBessel, MatchOracles)
{
    for (double x : grid) {
        expect_close(bessel_i0(x), oracle::bessel_i0(x), 1e-10, "I0", x);
        expect_close(bessel_k1(x), oracle::bessel_k1(x), 1e-10, "K1", x);
    }
}

TEST(Struve, Examples)
{
    EXPECT_EQ(struve_l0(0.0), 0.0);
    EXPECT_EQ(i0_minus_l0(0.0), 1.0);
    EXPECT_NEAR(i0_minus_l0(1.0), 0.5558226918141174, 1e-12);
    EXPECT_NEAR(bessel_i0(1.0) - struve_l0(1.0), 0.5558227, 1e-7);
}

TEST(Struve, MatchesSeriesOracle)
{
    for (double x : grid) {
        expect_close(struve_l0(x), oracle::struve_l0(x), 1e-10, "L0", x);
        const oracle::hp diff = oracle::bessel_i0(x) - oracle::struve_l0(x);
        expect_close(i0_minus_l0(x), diff, 1e-10, "I0-L0", x);
    }
}

TEST(Struve, DifferenceIsSmoothAcrossAsymptoticSwitch)
{
    for (double x : {29.0, 29.999, 30.0, 30.001, 31.0, 45.0, 120.0}) {
        const oracle::hp hx(x);
        const oracle::hp diff = oracle::bessel_i0(hx) - oracle::struve_l0(hx);
        EXPECT_NEAR(i0_minus_l0(x), static_cast<double>(diff), 1e-12) << x;
    }
    // Large argument: I0 - L0 -> 2/(pi x)
    EXPECT_NEAR(i0_minus_l0(700.0) * 700.0 * std::numbers::pi / 2.0, 1.0, 1e-5);
}

TEST(K1MinusInverse, MatchesOracleAndVanishesAtOrigin)
{
    EXPECT_EQ(k1_minus_inverse(0.0), 0.0);
    for (double x : oracle::logspace(1e-8, 20.0, 60)) {
        const oracle::hp hx(x);
        const oracle::hp ref = oracle::bessel_k1(hx) - 1 / hx;
        EXPECT_LE(std::abs(k1_minus_inverse(x) - static_cast<double>(ref)), 1e-13) << x;
    }
}

TEST(SmallArgument, AsymptoticRelations)
{
    // K1(x) = 1/x + O(x ln x), L0(x) = 2x/pi + O(x^3), I0(x) = 1 + O(x^2)
    for (double x : oracle::logspace(1e-6, 0.1, 40)) {
        EXPECT_LE(std::abs(bessel_k1(x) - 1.0 / x), 1.0 * x * std::abs(std::log(x))) << x;
        EXPECT_LE(std::abs(struve_l0(x) - 2.0 * x / std::numbers::pi), 0.1 * x * x * x + 1e-17) << x;
        EXPECT_LE(std::abs(bessel_i0(x) - 1.0), 0.3 * x * x + 1e-16) << x;
    }
}

TEST(BesselZero, Examples)
{
    EXPECT_NEAR(bessel_zero(0, 1), 2.4048255577, 1e-9);
    EXPECT_NEAR(bessel_zero(1, 1), 3.8317059702, 1e-9);
    EXPECT_GT(bessel_zero(0, 2), bessel_zero(0, 1));
    EXPECT_THROW(bessel_zero(0, 0), std::invalid_argument);
}

TEST(BesselZero, MatchesNewtonOracleAndIncreases)
{
    for (int n : {0, 1}) {
        double prev = 0.0;
        for (int k = 1; k <= 25; ++k) {
            const double z = bessel_zero(n, k);
            EXPECT_NEAR(z, static_cast<double>(oracle::bessel_zero(n, k)), 1e-9) << n << "," << k;
            EXPECT_GT(z, prev);
            prev = z;
        }
    }
}
