#include "openturb/rng.hpp"

#include <cmath>
#include <numbers>

namespace openturb {

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t derive_substream_seed(std::uint64_t master_seed,
                                    std::uint64_t trajectory_index) {
    // Equivalent to taking output #trajectory_index of a SplitMix64 stream
    // seeded with master_seed; injective in the index because the golden
    // ratio increment is odd and the finalizer is a bijection.
    return splitmix64_mix(master_seed +
                          trajectory_index * 0x9e3779b97f4a7c15ull);
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(a) * b) >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint32_t hi0 = mulhi(kPhiloxM0, ctr[0]);
        const std::uint32_t lo0 = kPhiloxM0 * ctr[0];
        const std::uint32_t hi1 = mulhi(kPhiloxM1, ctr[2]);
        const std::uint32_t lo1 = kPhiloxM1 * ctr[2];
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

NormalStream::NormalStream(std::uint64_t master_seed,
                           std::uint64_t trajectory_index) {
    const std::uint64_t sub = derive_substream_seed(master_seed, trajectory_index);
    key_ = {static_cast<std::uint32_t>(sub),
            static_cast<std::uint32_t>(sub >> 32)};
}

double NormalStream::next() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_index_),
        static_cast<std::uint32_t>(block_index_ >> 32), 0u, 0u};
    const std::array<std::uint32_t, 4> out = philox4x32(ctr, key_);
    ++block_index_;

    const std::uint64_t a =
        (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    const std::uint64_t b =
        (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    // u1 in (0, 1]: top 53 bits shifted into [1, 2^53] then scaled. Keeps
    // log(u1) finite; u2 in [0, 1) is fine for the angle.
    const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;

    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(angle);
    have_cached_ = true;
    return r * std::cos(angle);
}

}  // namespace openturb
