#include <gtest/gtest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "fbshare/channel.hpp"
#include "fbshare/rng.hpp"
#include "support/stats.hpp"

using namespace fbshare;
namespace ft = fbshare::testing;

namespace {

using Block = std::array<std::uint32_t, 4>;

Block philox(Block ctr, std::array<std::uint32_t, 2> key) { return detail::philox4x32_10(ctr, key); }

}  // namespace

// Known-answer vectors of the Random123 distribution for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
    EXPECT_EQ(philox({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
    const std::uint32_t f = 0xffffffffu;
    EXPECT_EQ(philox({f, f, f, f}, {f, f}), (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
    EXPECT_EQ(philox({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameKeyReplays) {
    RngStream a(7, 3, 2), b(7, 3, 2);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, CopyReplaysFromPosition) {
    RngStream a(7, 3);
    for (int i = 0; i < 5; ++i) a.next_u64();
    RngStream b = a;
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, DistinctKeysDiffer) {
    RngStream base(7, 3);
    RngStream other_seed(8, 3), other_stream(7, 4);
    RngStream sub = base.substream(1);
    const auto first = base.next_u64();
    EXPECT_NE(first, other_seed.next_u64());
    EXPECT_NE(first, other_stream.next_u64());
    EXPECT_NE(first, sub.next_u64());
}

TEST(RngStream, IndependentOfThreadInterleaving) {
    std::vector<std::uint64_t> serial(8), threaded(8);
    for (std::uint32_t s = 0; s < 8; ++s) {
        RngStream r = RngStream(11, 5).substream(s);
        for (int i = 0; i < 999; ++i) r.next_u64();
        serial[s] = r.next_u64();
    }
    std::vector<std::thread> pool;
    for (std::uint32_t s = 0; s < 8; ++s)
        pool.emplace_back([&, s] {
            RngStream r = RngStream(11, 5).substream(s);
            for (int i = 0; i < 999; ++i) r.next_u64();
            threaded[s] = r.next_u64();
        });
    for (auto& t : pool) t.join();
    EXPECT_EQ(serial, threaded);
}

TEST(RngStream, MakeStreamIdPacks) {
    EXPECT_EQ(make_stream_id(1, 2), (std::uint64_t{1} << 32) | 2u);
}

TEST(RngStream, UniformIsOpenUnitAndUnbiased) {
    RngStream r(1, 0);
    std::vector<double> u(100000);
    for (auto& v : u) {
        v = r.uniform();
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
    EXPECT_GT(ft::ks_test(u, [](double x) { return x; }), 0.01);
}

TEST(RngStream, ComplexNormalHasUnitVariance) {
    RngStream r(2, 0);
    const int n = 200000;
    double re2 = 0, im2 = 0, mix = 0;
    for (int i = 0; i < n; ++i) {
        const auto g = r.complex_normal();
        re2 += g.real() * g.real();
        im2 += g.imag() * g.imag();
        mix += g.real() * g.imag();
    }
    const double tol = 5.0 * std::sqrt(0.5 / n);
    EXPECT_NEAR(re2 / n, 0.5, tol);
    EXPECT_NEAR(im2 / n, 0.5, tol);
    EXPECT_NEAR(mix / n, 0.0, tol);
}

TEST(Channel, GainHasMeanM) {
    RngStream r(3, 0);
    for (std::size_t m : {1u, 4u}) {
        const int n = 50000;
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += norm_sq(sample_channel_set(m, 1, {}, r).channels[0]);
        // Gamma(m, 1) has variance m
        EXPECT_NEAR(acc / n, static_cast<double>(m), 5.0 * std::sqrt(static_cast<double>(m) / n));
    }
}

TEST(Channel, SameStreamSameChannels) {
    RngStream a(4, 9), b(4, 9);
    const double gains[] = {1.5, 0.5};
    const auto x = sample_channel_set(3, 2, gains, a);
    const auto y = sample_channel_set(3, 2, gains, b);
    for (std::size_t u = 0; u < 2; ++u) {
        EXPECT_EQ(x.path_loss[u], gains[u]);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x.channels[u][i], y.channels[u][i]);
    }
}

TEST(Channel, RejectsBadDimensions) {
    RngStream r(5, 0);
    EXPECT_THROW(sample_channel_set(2, 3, {}, r), std::invalid_argument);
    EXPECT_THROW(sample_channel_set(0, 0, {}, r), std::invalid_argument);
    EXPECT_THROW(sample_channel_set(9, 1, {}, r), std::invalid_argument);
    const double bad[] = {1.0, -1.0};
    EXPECT_THROW(sample_channel_set(2, 2, bad, r), std::invalid_argument);
}

TEST(Isotropic, UnitNorm) {
    RngStream r(6, 0);
    for (std::size_t m = 1; m <= 8; ++m)
        for (int i = 0; i < 200; ++i) EXPECT_LT(std::abs(norm(sample_isotropic_unit(m, r)) - 1.0), 1e-12);
}

TEST(Isotropic, OneDimensionalIsUnitModulus) {
    RngStream r(6, 1);
    EXPECT_NEAR(std::abs(sample_isotropic_unit(1, r)[0]), 1.0, 1e-12);
}

TEST(Isotropic, SquaredOverlapIsBeta) {
    RngStream r(6, 2);
    for (std::size_t m : {2u, 4u, 8u}) {
        CVec u(m);
        u[0] = 1.0;
        std::vector<double> x(100000);
        for (auto& v : x) v = std::norm(inner(sample_isotropic_unit(m, r), u));
        const double d = static_cast<double>(m) - 1.0;
        EXPECT_GT(ft::ks_test(x, [d](double t) { return 1.0 - std::pow(1.0 - t, d); }), 0.01) << "M=" << m;
    }
}

TEST(Isotropic, IndependentPairOverlapMean) {
    RngStream r(6, 3);
    const int n = 100000;
    std::vector<double> x(n);
    for (auto& v : x) v = std::norm(inner(sample_isotropic_unit(4, r), sample_isotropic_unit(4, r)));
    EXPECT_NEAR(ft::mean_of(x), 0.25, 5.0 * ft::stddev_of(x) / std::sqrt(n));
}

TEST(Nullspace, TwoDimensionalComplement) {
    RngStream r(7, 0);
    const CVec anchor{1.0, 0.0};
    for (int i = 0; i < 100; ++i) {
        const CVec e = sample_unit_in_nullspace(anchor, r);
        EXPECT_LT(std::abs(e[0]), 1e-15);
        EXPECT_NEAR(std::abs(e[1]), 1.0, 1e-12);
    }
}

TEST(Nullspace, OrthogonalToAnchor) {
    RngStream r(7, 1);
    for (int i = 0; i < 1000; ++i) {
        const CVec anchor = sample_isotropic_unit(4, r);
        const CVec e = sample_unit_in_nullspace(anchor, r);
        EXPECT_LT(std::norm(inner(anchor, e)), 1e-20);
        EXPECT_LT(std::abs(norm(e) - 1.0), 1e-12);
    }
}

TEST(Nullspace, IsotropicInComplement) {
    RngStream r(7, 2);
    const CVec anchor{1.0, 0.0, 0.0, 0.0};
    const CVec v{0.0, cplx(0.6, 0.0), cplx(0.0, 0.8), 0.0};
    const int n = 100000;
    std::vector<double> x(n);
    for (auto& s : x) s = std::norm(inner(sample_unit_in_nullspace(anchor, r), v));
    EXPECT_NEAR(ft::mean_of(x), 1.0 / 3.0, 5.0 * ft::stddev_of(x) / std::sqrt(n));
    // isotropic in a 3-dimensional complement: beta(1, 2)
    EXPECT_GT(ft::ks_test(x, [](double t) { return 1.0 - (1.0 - t) * (1.0 - t); }), 0.01);
}

TEST(Nullspace, RejectsScalarAnchor) {
    RngStream r(7, 3);
    EXPECT_THROW(sample_unit_in_nullspace(CVec{1.0}, r), std::invalid_argument);
}
