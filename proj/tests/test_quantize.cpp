#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fbshare/channel.hpp"
#include "fbshare/quantize.hpp"
#include "support/stats.hpp"

using namespace fbshare;
namespace ft = fbshare::testing;

namespace {

// E[Z] = int_0^1 (1 - z^{M-1})^N dz expanded binomially; exact enough for N <= 8.
double mean_error_binomial(int bits, std::size_t m) {
    const int n = 1 << bits;
    const double d = static_cast<double>(m) - 1.0;
    long double acc = 0, c = 1;
    for (int j = 0; j <= n; ++j) {
        acc += (j % 2 ? -c : c) / (d * j + 1.0L);
        c = c * (n - j) / (j + 1);
    }
    return static_cast<double>(acc);
}

// eta_b = 2 prod_{i=2^b}^{2^{b+1}-1} i / (i + M/(M-1))
double eta(int b, std::size_t m) {
    const double a = static_cast<double>(m) / (static_cast<double>(m) - 1.0);
    long double log_prod = std::log(2.0L);
    for (std::uint64_t i = std::uint64_t{1} << b; i < (std::uint64_t{1} << (b + 1)); ++i)
        log_prod += std::log1p(-a / (static_cast<long double>(i) + a));
    return static_cast<double>(std::exp(log_prod));
}

double rvq_cdf(double z, int bits, std::size_t m) {
    const double t = std::pow(z, static_cast<double>(m) - 1.0);
    return -std::expm1(std::ldexp(1.0, bits) * std::log1p(-t));
}

double cap_cdf(double z, int bits, std::size_t m) {
    return std::min(1.0, std::ldexp(std::pow(z, static_cast<double>(m) - 1.0), bits));
}

CVec random_channel(std::size_t m, RngStream& rng) { return sample_gaussian_vector(m, rng); }

}  // namespace

TEST(ErrorFromUniform, RvqExamples) {
    EXPECT_DOUBLE_EQ(error_from_uniform({Codebook::rvq, 0, 2}, 0.5), 0.5);
    EXPECT_NEAR(error_from_uniform({Codebook::rvq, 3, 4}, 0.5), std::cbrt(1.0 - std::pow(0.5, 0.125)), 1e-14);
    EXPECT_NEAR(error_from_uniform({Codebook::rvq, 3, 4}, 0.5), 0.43620, 5e-6);
}

TEST(ErrorFromUniform, RvqStaysPositiveAtManyBits) {
    for (int b : {24, 40, 60}) {
        const double z = error_from_uniform({Codebook::rvq, b, 4}, 0.3);
        // 1 - u^{2^-b} ~ -ln(u) 2^-b for tiny 2^-b
        const double expected = std::cbrt(-std::log(0.3) * std::ldexp(1.0, -b));
        EXPECT_GT(z, 0.0);
        EXPECT_NEAR(z / expected, 1.0, 1e-6);
    }
}

TEST(ErrorFromUniform, CapSupportEdge) {
    for (int b : {0, 3, 12})
        EXPECT_NEAR(error_from_uniform({Codebook::spherical_cap, b, 4}, 1.0), std::pow(2.0, -b / 3.0), 1e-15);
}

TEST(ErrorFromUniform, RejectsBadInput) {
    EXPECT_THROW(error_from_uniform({Codebook::rvq, -1, 4}, 0.5), std::invalid_argument);
    EXPECT_THROW(error_from_uniform({Codebook::rvq, 2, 1}, 0.5), std::invalid_argument);
    EXPECT_THROW(error_from_uniform({Codebook::rvq, 2, 9}, 0.5), std::invalid_argument);
}

TEST(ErrorForDraw, SharedDrawsGiveCapBelowRvq) {
    RngStream r(1, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        for (int b : {0, 2, 8})
            // b = 0 gives the same law through two formulas, equal up to rounding
            EXPECT_LE(error_for_draw({Codebook::spherical_cap, b, 4}, u),
                      error_for_draw({Codebook::rvq, b, 4}, u) * (1.0 + 1e-14));
    }
}

TEST(MeanError, SmallExamples) {
    EXPECT_NEAR(mean_error(0, 2), 0.5, 1e-14);
    EXPECT_NEAR(mean_error(1, 2), 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(mean_error(0, 4), 0.75, 1e-14);
    EXPECT_NEAR(mean_error(1, 4), 9.0 / 14.0, 1e-14);
}

TEST(MeanError, MatchesBinomialIntegral) {
    for (std::size_t m = 2; m <= 8; ++m)
        for (int b = 0; b <= 3; ++b) EXPECT_NEAR(mean_error(b, m), mean_error_binomial(b, m), 1e-12) << m << "," << b;
}

TEST(MeanError, SatisfiesRatioRecursion) {
    for (std::size_t m = 2; m <= 8; ++m)
        for (int b = 0; b < 24; ++b) {
            const double ratio = mean_error(b + 1, m) / mean_error(b, m);
            EXPECT_NEAR(ratio / eta(b, m), 1.0, 1e-10) << m << "," << b;
        }
}

TEST(MeanError, HighResolutionScaling) {
    // E[Z] ~ Gamma(M/(M-1)) 2^{-b/(M-1)} for large b
    for (std::size_t m : {2u, 4u, 8u}) {
        const double a = static_cast<double>(m) / (static_cast<double>(m) - 1.0);
        const int b = 40;
        EXPECT_NEAR(mean_error(b, m) / (std::tgamma(a) * std::pow(2.0, -b / (static_cast<double>(m) - 1.0))), 1.0, 1e-6);
    }
}

TEST(MeanLog2Error, Examples) {
    EXPECT_NEAR(mean_log2_error(0, 2), -std::numbers::log2e, 1e-12);
    EXPECT_NEAR(mean_log2_error(0, 2), -1.442695, 1e-6);
    EXPECT_NEAR(mean_log2_error(2, 4), -std::numbers::log2e / 3.0 * (25.0 / 12.0), 1e-12);
    EXPECT_NEAR(mean_log2_error(2, 4), -1.00187, 1e-5);
}

TEST(MeanLog2Error, HarmonicPathsAgree) {
    const std::uint64_t n = std::uint64_t{1} << 20;
    EXPECT_NEAR(harmonic_direct(n), harmonic_asymptotic(static_cast<double>(n)), 1e-9);
    EXPECT_NEAR(harmonic_direct(1000), harmonic_asymptotic(1000.0), 1e-9);
    const double direct = -std::numbers::log2e / 3.0 * harmonic_direct(n);
    EXPECT_NEAR(mean_log2_error(20, 4), direct, 1e-9);
}

TEST(MeanLog2Error, RecursionByHarmonicBlocks) {
    for (std::size_t m = 2; m <= 8; ++m)
        for (int b = 0; b < 16; ++b) {
            long double block = 0;
            for (std::uint64_t i = (std::uint64_t{1} << b) + 1; i <= (std::uint64_t{1} << (b + 1)); ++i) block += 1.0L / i;
            const double expected = -std::numbers::log2e / (static_cast<double>(m) - 1.0) * static_cast<double>(block);
            const double step = mean_log2_error(b + 1, m) - mean_log2_error(b, m);
            EXPECT_NEAR(step / expected, 1.0, 1e-10) << m << "," << b;
        }
}

TEST(MeanError, ConvexFromTwoBits) {
    for (std::size_t m = 2; m <= 8; ++m)
        for (int b = 2; b <= 30; ++b) {
            const double d0 = mean_error(b + 1, m) - mean_error(b, m);
            const double d1 = mean_error(b + 2, m) - mean_error(b + 1, m);
            EXPECT_GT(d1, d0) << "M=" << m << " b=" << b;
        }
}

TEST(MeanError, ConvexEverywhereForTwoAndThreeAntennas) {
    for (std::size_t m : {2u, 3u})
        for (int b = 0; b <= 30; ++b)
            EXPECT_GT(mean_error(b + 2, m) - mean_error(b + 1, m), mean_error(b + 1, m) - mean_error(b, m)) << m << "," << b;
}

// The first step is steeper than the second once M >= 4, so E[Z] is not
// convex over the whole bit range.
TEST(MeanError, NotConvexAtZeroBitsForFourAntennas) {
    const double z0 = mean_error_binomial(0, 4), z1 = mean_error_binomial(1, 4), z2 = mean_error_binomial(2, 4);
    EXPECT_LT(z2 - z1, z1 - z0);
    EXPECT_NEAR((z2 - z1) - (z1 - z0), -0.00164835, 1e-8);
    EXPECT_NEAR((mean_error(2, 4) - mean_error(1, 4)) - (mean_error(1, 4) - mean_error(0, 4)), -0.00164835, 1e-8);
    for (std::size_t m = 4; m <= 8; ++m)
        EXPECT_LT(mean_error(2, m) - mean_error(1, m), mean_error(1, m) - mean_error(0, m)) << "M=" << m;
}

TEST(MeanLog2Error, StrictlyConcave) {
    for (std::size_t m = 2; m <= 8; ++m)
        for (int b = 0; b <= 30; ++b) {
            const double d0 = mean_log2_error(b + 1, m) - mean_log2_error(b, m);
            const double d1 = mean_log2_error(b + 2, m) - mean_log2_error(b + 1, m);
            EXPECT_LT(d1, d0) << "M=" << m << " b=" << b;
        }
}

TEST(SampleErrorDirect, MeansMatchClosedForms) {
    const int n = 200000;
    for (std::size_t m : {2u, 4u})
        for (int b : {0, 2, 8, 16}) {
            RngStream r(2, make_stream_id(static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(b)));
            std::vector<double> z(n), lz(n);
            for (int i = 0; i < n; ++i) {
                z[i] = sample_error_direct({Codebook::rvq, b, m}, r);
                lz[i] = std::log2(z[i]);
            }
            EXPECT_NEAR(ft::mean_of(z), mean_error(b, m), 4.0 * ft::stddev_of(z) / std::sqrt(n)) << m << "," << b;
            EXPECT_NEAR(ft::mean_of(lz), mean_log2_error(b, m), 4.0 * ft::stddev_of(lz) / std::sqrt(n)) << m << "," << b;
        }
}

TEST(SampleErrorDirect, KsAgainstClosedForm) {
    const int n = 100000;
    for (std::size_t m : {2u, 4u, 8u})
        for (int b : {0, 4, 16}) {
            RngStream r(3, make_stream_id(static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(b)));
            std::vector<double> z(n), c(n);
            for (int i = 0; i < n; ++i) {
                z[i] = sample_error_direct({Codebook::rvq, b, m}, r);
                c[i] = sample_error_direct({Codebook::spherical_cap, b, m}, r);
            }
            EXPECT_GT(ft::ks_test(z, [&](double t) { return rvq_cdf(t, b, m); }), 0.01) << "rvq " << m << "," << b;
            EXPECT_GT(ft::ks_test(c, [&](double t) { return cap_cdf(t, b, m); }), 0.01) << "cap " << m << "," << b;
        }
}

TEST(SampleErrorDirect, CcdfWithinDkwBand) {
    const std::size_t n = 100000;
    const std::size_t m = 4;
    const int b = 6;
    RngStream r(4, 0);
    std::vector<double> z(n);
    for (auto& v : z) v = sample_error_direct({Codebook::rvq, b, m}, r);
    std::sort(z.begin(), z.end());
    const double eps = ft::dkw_epsilon(n, 0.01);
    for (int g = 1; g < 200; ++g) {
        const double t = g / 200.0;
        const double empirical_ccdf =
            1.0 - static_cast<double>(std::upper_bound(z.begin(), z.end(), t) - z.begin()) / static_cast<double>(n);
        EXPECT_LE(std::abs(empirical_ccdf - (1.0 - rvq_cdf(t, b, m))), eps) << "z=" << t;
    }
}

TEST(SampleErrorDirect, CapStochasticallySmaller) {
    const std::size_t n = 100000;
    for (int b : {1, 4, 10}) {
        RngStream r(5, static_cast<std::uint64_t>(b));
        std::vector<double> rvq(n), cap(n);
        for (std::size_t i = 0; i < n; ++i) rvq[i] = sample_error_direct({Codebook::rvq, b, 4}, r);
        for (std::size_t i = 0; i < n; ++i) cap[i] = sample_error_direct({Codebook::spherical_cap, b, 4}, r);
        std::sort(rvq.begin(), rvq.end());
        std::sort(cap.begin(), cap.end());
        // independent samples: allow the two-sample DKW slack in probability
        const double slack = 2.0 * ft::dkw_epsilon(n, 0.01);
        for (int q = 1; q < 100; ++q) {
            const double t = cap[n * q / 100];
            const double f_rvq = static_cast<double>(std::upper_bound(rvq.begin(), rvq.end(), t) - rvq.begin()) / n;
            EXPECT_LE(f_rvq, q / 100.0 + slack) << "b=" << b << " q=" << q;
        }
        EXPECT_LT(cap[n / 2], rvq[n / 2]);
    }
}

TEST(QuantizeDirect, OutcomeInvariants) {
    RngStream r(6, 0);
    for (std::size_t m : {2u, 4u, 8u})
        for (int i = 0; i < 500; ++i) {
            const CVec h = random_channel(m, r);
            const auto out = quantize_direct(h, {Codebook::rvq, 4, m}, r);
            const CVec h_tilde = scaled(h, 1.0 / norm(h));
            EXPECT_NEAR(out.q, norm_sq(h), 1e-12 * out.q);
            EXPECT_LT(std::abs(norm(out.h_hat) - 1.0), 1e-12);
            EXPECT_LT(std::abs(norm(out.e) - 1.0), 1e-12);
            EXPECT_LT(std::abs(inner(out.h_hat, out.e)), 1e-12);
            EXPECT_NEAR(1.0 - std::norm(inner(h_tilde, out.h_hat)), out.z, 1e-12);
            // h_tilde = sqrt(1 - z) h_hat + sqrt(z) e
            const CVec rebuilt = combine(std::sqrt(1.0 - out.z), out.h_hat, std::sqrt(out.z), out.e);
            EXPECT_LT(norm(combine(1.0, rebuilt, -1.0, h_tilde)), 1e-12);
        }
}

TEST(QuantizeDirect, RejectsMismatch) {
    RngStream r(6, 1);
    EXPECT_THROW(quantize_direct(random_channel(3, r), {Codebook::rvq, 2, 4}, r), std::invalid_argument);
    EXPECT_THROW(quantize_direct(CVec(4), {Codebook::rvq, 2, 4}, r), std::invalid_argument);
}

TEST(AssembleDirect, ZeroErrorReturnsChannelDirection) {
    const CVec h_tilde{1.0, 0.0, 0.0};
    const CVec orth{0.0, 1.0, 0.0};
    const auto out = assemble_direct(h_tilde, 2.0, 0.0, orth);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out.h_hat[i], h_tilde[i]);
    EXPECT_LT(std::abs(inner(out.h_hat, out.e)), 1e-15);
}

TEST(QuantizeExplicit, OutcomeInvariants) {
    RngStream r(7, 0);
    for (std::size_t m : {2u, 4u})
        for (int i = 0; i < 200; ++i) {
            const CVec h = random_channel(m, r);
            const auto out = quantize_explicit(h, 5, r);
            const CVec h_tilde = scaled(h, 1.0 / norm(h));
            EXPECT_LT(std::abs(norm(out.h_hat) - 1.0), 1e-12);
            EXPECT_LT(std::abs(norm(out.e) - 1.0), 1e-12);
            EXPECT_LT(std::abs(inner(out.h_hat, out.e)), 1e-12);
            EXPECT_GE(inner(out.h_hat, h_tilde).real(), 0.0);
            EXPECT_LT(std::abs(inner(out.h_hat, h_tilde).imag()), 1e-12);
            const CVec rebuilt = combine(std::sqrt(1.0 - out.z), out.h_hat, std::sqrt(out.z), out.e);
            EXPECT_LT(norm(combine(1.0, rebuilt, -1.0, h_tilde)), 1e-10);
        }
}

TEST(QuantizeExplicit, EnforcesCap) {
    RngStream r(7, 1);
    EXPECT_THROW(quantize_explicit(random_channel(4, r), 17, r), std::invalid_argument);
    EXPECT_THROW(quantize_explicit(random_channel(4, r), 3, r, 2), std::invalid_argument);
    EXPECT_THROW(quantize_explicit(random_channel(4, r), -1, r), std::invalid_argument);
}

TEST(QuantizeExplicit, MatchesDirectSampler) {
    const int n = 20000;
    for (auto [m, b] : {std::pair<std::size_t, int>{2, 4}, {4, 8}}) {
        RngStream re(8, make_stream_id(static_cast<std::uint32_t>(m), 0));
        RngStream rd(8, make_stream_id(static_cast<std::uint32_t>(m), 1));
        std::vector<double> ze(n), zd(n), ae(n), ad(n);
        for (int i = 0; i < n; ++i) {
            const CVec h = random_channel(m, re);
            const auto e = quantize_explicit(h, b, re);
            ze[i] = e.z;
            ae[i] = std::norm(inner(e.e, sample_unit_in_nullspace(e.h_hat, re)));
            const CVec hd = random_channel(m, rd);
            const auto d = quantize_direct(hd, {Codebook::rvq, b, m}, rd);
            zd[i] = d.z;
            ad[i] = std::norm(inner(d.e, sample_unit_in_nullspace(d.h_hat, rd)));
        }
        EXPECT_GT(ft::ks_test(ze, zd), 0.01) << "z at M=" << m << " b=" << b;
        EXPECT_GT(ft::ks_test(ft::rounded(ae), ft::rounded(ad)), 0.01) << "|e^H v|^2 at M=" << m << " b=" << b;
        EXPECT_GT(ft::ks_test(ze, [&](double t) { return rvq_cdf(t, b, m); }), 0.01);
    }
}
