#pragma once

#include <array>
#include <cstdint>

namespace openturb {

// SplitMix64 output finalizer (Steele, Lea, Flood 2014); bijective on 64-bit
// words, so distinct inputs never collide.
std::uint64_t splitmix64_mix(std::uint64_t z);

// Key for one trajectory's noise stream. Injective in trajectory_index for a
// fixed master seed and identical on every platform.
std::uint64_t derive_substream_seed(std::uint64_t master_seed,
                                    std::uint64_t trajectory_index);

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) with the
// published round constants. Pure function: output depends only on
// (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Deterministic stream of standard normal deviates. Each 128-bit Philox
// block yields two Box-Muller normals; blocks are indexed by a 64-bit
// counter, the key is the trajectory substream seed. u1 is mapped into
// (0, 1] so log(u1) is always finite.
class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, std::uint64_t trajectory_index);

    double next();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t block_index_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace openturb
