#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "openturb/rng.hpp"

using namespace openturb;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Published test vectors for philox4x32 with 10 rounds.
    auto out = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                     {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                     {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("substream derivation: frozen values") {
    CHECK(derive_substream_seed(0, 0) == 0xe220a8397b1dcdafull);
    CHECK(derive_substream_seed(0, 1) == 0x6e789e6aa1b965f4ull);
    CHECK(derive_substream_seed(42, 0) == 0xbdd732262feb6e95ull);
    CHECK(derive_substream_seed(0xDEADBEEF, 12345) == 0x48a45c7bd27848d3ull);
}

TEST_CASE("substream derivation: no collisions over 1e6 trajectories") {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(2'000'000);
    for (std::uint64_t i = 0; i < 1'000'000; ++i)
        CHECK(seen.insert(derive_substream_seed(7, i)).second);
}

TEST_CASE("substream derivation: distinct master seeds give distinct streams") {
    CHECK(derive_substream_seed(1, 5) != derive_substream_seed(2, 5));
    // index arithmetic must not alias neighbouring seeds
    CHECK(derive_substream_seed(1, 5) != derive_substream_seed(1, 6));
}

TEST_CASE("normal stream: frozen deviates") {
    NormalStream s(42, 0);
    CHECK(s.next() == doctest::Approx(0.3276773239482347).epsilon(1e-15));
    CHECK(s.next() == doctest::Approx(0.8998538678237984).epsilon(1e-15));
    CHECK(s.next() == doctest::Approx(0.017263621344337177).epsilon(1e-15));
    CHECK(s.next() == doctest::Approx(1.7554469116770313).epsilon(1e-15));
    CHECK(s.next() == doctest::Approx(0.5323571576172722).epsilon(1e-15));
    CHECK(s.next() == doctest::Approx(0.503555453357536).epsilon(1e-15));

    NormalStream t(1, 7);
    CHECK(t.next() == doctest::Approx(-0.425918146464185).epsilon(1e-15));
    CHECK(t.next() == doctest::Approx(-0.64532566794985).epsilon(1e-15));
    CHECK(t.next() == doctest::Approx(-1.4492545554260587).epsilon(1e-15));
    CHECK(t.next() == doctest::Approx(-0.8435422276002331).epsilon(1e-15));
}

TEST_CASE("normal stream: identical construction replays identically") {
    NormalStream a(9, 3), b(9, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("normal stream: moments over 4e6 draws") {
    const std::size_t n_streams = 1000, per_stream = 4000;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (std::size_t i = 0; i < n_streams; ++i) {
        NormalStream s(123, i);
        for (std::size_t k = 0; k < per_stream; ++k) {
            const double v = s.next();
            s1 += v;
            s2 += v * v;
            s3 += v * v * v;
            s4 += v * v * v * v;
        }
    }
    const double n = static_cast<double>(n_streams * per_stream);
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 2e-3);
    CHECK(std::abs(var - 1.0) < 2e-3);
    CHECK(std::abs(s3 / n) < 6e-3);           // skewness
    CHECK(std::abs(s4 / n - 3.0) < 1.5e-2);   // kurtosis
}

TEST_CASE("splitmix64 finalizer is bijective on a sample") {
    // spot-check invertibility indirectly: distinct inputs, distinct outputs
    std::unordered_set<std::uint64_t> outs;
    for (std::uint64_t z = 0; z < 10000; ++z)
        CHECK(outs.insert(splitmix64_mix(z)).second);
}
