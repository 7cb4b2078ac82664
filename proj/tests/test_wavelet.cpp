#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "rtbwt/wavelet.hpp"

using namespace rtbwt;

namespace {

constexpr double kPi = 3.14159265358979323846;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

Band random_band(std::mt19937_64& rng, std::size_t m) {
    Band b(m);
    for (double& v : b) v = 2.0 * uniform01(rng) - 1.0;
    return b;
}

double dot(const Band& a, const Band& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// The definition itself, evaluated without any folding or wrap tricks.
Band naive_periodic_filter(const Band& x, const std::vector<double>& taps, long offset) {
    const long m = static_cast<long>(x.size());
    Band out(x.size(), 0.0);
    for (long i = 0; i < m; ++i) {
        for (long k = 0; k < static_cast<long>(taps.size()); ++k) {
            long idx = (i + k + offset) % m;
            if (idx < 0) idx += m;
            out[i] += taps[k] * x[idx];
        }
    }
    return out;
}

} // namespace

TEST_CASE("haar filter pair") {
    const WaveletFilterPair f = make_filter("haar");
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(f.length() == 2);
    CHECK(f.lowpass[0] == doctest::Approx(s).epsilon(1e-15));
    CHECK(f.lowpass[1] == doctest::Approx(s).epsilon(1e-15));
    CHECK(f.highpass[0] == doctest::Approx(s).epsilon(1e-15));
    CHECK(f.highpass[1] == doctest::Approx(-s).epsilon(1e-15));
    // synthesis taps: reversed and halved
    CHECK(f.synthesis_lowpass[0] == doctest::Approx(s / 2).epsilon(1e-15));
    CHECK(f.synthesis_lowpass[1] == doctest::Approx(s / 2).epsilon(1e-15));
    CHECK(f.synthesis_highpass[0] == doctest::Approx(-s / 2).epsilon(1e-15));
    CHECK(f.synthesis_highpass[1] == doctest::Approx(s / 2).epsilon(1e-15));
}

TEST_CASE("filter pair identities") {
    for (const char* name : {"haar", "sym8"}) {
        CAPTURE(name);
        const WaveletFilterPair f = make_filter(name);
        const std::size_t L = f.length();

        // normalization
        double hsum = 0, gsum = 0, hnorm = 0;
        for (std::size_t k = 0; k < L; ++k) {
            hsum += f.lowpass[k];
            gsum += f.highpass[k];
            hnorm += f.lowpass[k] * f.lowpass[k];
        }
        CHECK(hsum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        CHECK(gsum == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(hnorm == doctest::Approx(1.0).epsilon(1e-12));

        // alternating-sign time reversal ties the pair together
        for (std::size_t k = 0; k < L; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            CHECK(f.highpass[k] == doctest::Approx(sign * f.lowpass[L - 1 - k]).epsilon(1e-12));
        }

        // double-shift orthogonality of the lowpass
        for (std::size_t j = 1; 2 * j < L; ++j) {
            double acc = 0;
            for (std::size_t k = 0; k + 2 * j < L; ++k) acc += f.lowpass[k] * f.lowpass[k + 2 * j];
            CHECK(acc == doctest::Approx(0.0).epsilon(1e-12));
        }

        // half-scaled reversed synthesis taps
        for (std::size_t k = 0; k < L; ++k) {
            CHECK(f.synthesis_lowpass[k] == doctest::Approx(f.lowpass[L - 1 - k] / 2).epsilon(1e-14));
            CHECK(f.synthesis_highpass[k] == doctest::Approx(f.highpass[L - 1 - k] / 2).epsilon(1e-14));
        }
    }
    CHECK_THROWS(make_filter("db4"));
}

TEST_CASE("sym8 vanishing moments") {
    const WaveletFilterPair f = make_filter("sym8");
    for (int p = 0; p <= 5; ++p) {
        double acc = 0;
        for (std::size_t k = 0; k < f.length(); ++k) {
            acc += std::pow(static_cast<double>(k), p) * f.highpass[k];
        }
        CHECK(std::abs(acc) < 1e-6);
    }
}

TEST_CASE("periodic filter matches its definition") {
    std::mt19937_64 rng(23);
    for (std::size_t m : {1u, 2u, 3u, 5u, 8u, 16u, 33u}) {
        const Band x = random_band(rng, m);
        for (const char* name : {"haar", "sym8"}) {
            const WaveletFilterPair f = make_filter(name);
            for (long offset : {0L, 3L, 1L - static_cast<long>(f.length())}) {
                CAPTURE(m);
                CAPTURE(name);
                CAPTURE(offset);
                const Band got = periodic_filter(x, f.lowpass, offset);
                const Band want = naive_periodic_filter(x, f.lowpass, offset);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < m; ++i) {
                    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("periodic filter impulse and constant responses") {
    const WaveletFilterPair f = make_filter("haar");
    SUBCASE("impulse") {
        Band x(8, 0.0);
        x[0] = 1.0;
        const Band low = periodic_filter(x, f.lowpass, 0);
        // out[i] = sum_k h[k] x[(i+k) mod 8] picks up h[(0 - i) mod 8]
        CHECK(low[0] == doctest::Approx(f.lowpass[0]));
        CHECK(low[7] == doctest::Approx(f.lowpass[1]));
        for (std::size_t i = 1; i < 7; ++i) CHECK(low[i] == 0.0);
    }
    SUBCASE("constants") {
        for (const char* name : {"haar", "sym8"}) {
            const WaveletFilterPair filt = make_filter(name);
            const Band x(6, 3.5);
            const Subbands sb = analysis_step(x, filt);
            for (double v : sb.low) CHECK(v == doctest::Approx(3.5 * std::sqrt(2.0)).epsilon(1e-12));
            for (double v : sb.det) CHECK(std::abs(v) < 1e-12);
        }
    }
}

TEST_CASE("transfer functions are jointly tight") {
    // |H(nu)|^2 + |G(nu)|^2 == 2 at every sampled frequency, checked with a
    // directly summed DTFT — independent of the filtering code entirely.
    for (const char* name : {"haar", "sym8"}) {
        const WaveletFilterPair f = make_filter(name);
        const std::size_t m = 16;
        for (std::size_t j = 0; j < m; ++j) {
            const double nu = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(m);
            std::complex<double> H{0, 0}, G{0, 0};
            for (std::size_t k = 0; k < f.length(); ++k) {
                const std::complex<double> w = std::polar(1.0, -nu * static_cast<double>(k));
                H += f.lowpass[k] * w;
                G += f.highpass[k] * w;
            }
            CHECK(std::norm(H) + std::norm(G) == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("analysis preserves energy") {
    std::mt19937_64 rng(29);
    for (const char* name : {"haar", "sym8"}) {
        const WaveletFilterPair f = make_filter(name);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t m = 2 * (1 + rng() % 64);
            const Band x = random_band(rng, m);
            const Subbands sb = analysis_step(x, f);
            const double in = dot(x, x);
            const double out = dot(sb.low, sb.low) + dot(sb.det, sb.det);
            CHECK(out == doctest::Approx(2.0 * in).epsilon(1e-9));
        }
    }
}

TEST_CASE("even-odd split and merge") {
    const Band x{1, 2, 3, 4};
    const SplitHalves h = split_even_odd(x);
    CHECK(h.odd == Band{1, 3});
    CHECK(h.even == Band{2, 4});
    CHECK(merge_even_odd(h.odd, h.even) == x);

    CHECK_THROWS(split_even_odd(Band{1, 2, 3}));
    CHECK_THROWS(merge_even_odd(Band{1, 2}, Band{3}));

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Band b = random_band(rng, 2 * (1 + rng() % 100));
        const SplitHalves s = split_even_odd(b);
        CHECK(merge_even_odd(s.odd, s.even) == b);
    }
}

TEST_CASE("single filtering stage reconstructs perfectly at every even length") {
    std::mt19937_64 rng(37);
    for (const char* name : {"haar", "sym8"}) {
        const WaveletFilterPair f = make_filter(name);
        for (std::size_t m = 2; m <= 1024; m += 2) {
            const Band x = random_band(rng, m);
            const Subbands sb = analysis_step(x, f);
            const Band back = synthesis_merge(sb.low, sb.det, f);
            REQUIRE(back.size() == m);
            double err = 0;
            for (std::size_t i = 0; i < m; ++i) err = std::max(err, std::abs(back[i] - x[i]));
            CAPTURE(name);
            CAPTURE(m);
            CHECK(err <= 1e-10);
        }
    }
}

TEST_CASE("three-band synthesis step") {
    std::mt19937_64 rng(41);
    const WaveletFilterPair f = make_filter("sym8");
    const Band x = random_band(rng, 12);
    const Subbands sb = analysis_step(x, f);
    const SplitHalves halves = split_even_odd(sb.low);

    const Band back = synthesis_step(halves.odd, halves.even, sb.det, f);
    REQUIRE(back.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }

    CHECK_THROWS(synthesis_step(Band{1, 2}, Band{3}, Band{4, 5, 6}, f));
    CHECK_THROWS(synthesis_step(Band{1}, Band{2}, Band{3}, f));
}

TEST_CASE("analysis is linear") {
    std::mt19937_64 rng(43);
    const WaveletFilterPair f = make_filter("sym8");
    const std::size_t m = 20;
    const Band x = random_band(rng, m), y = random_band(rng, m);
    const double a = 1.7, b = -0.4;
    Band mix(m);
    for (std::size_t i = 0; i < m; ++i) mix[i] = a * x[i] + b * y[i];

    const Subbands sx = analysis_step(x, f), sy = analysis_step(y, f), sm = analysis_step(mix, f);
    for (std::size_t i = 0; i < m; ++i) {
        CHECK(sm.low[i] == doctest::Approx(a * sx.low[i] + b * sy.low[i]).epsilon(1e-12));
        CHECK(sm.det[i] == doctest::Approx(a * sx.det[i] + b * sy.det[i]).epsilon(1e-12));
    }
}
