#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace agemdp {

/// SplitMix64 step; used for seeding and for deriving independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** 1.0 (Blackman & Vigna). Output is identical on every platform,
/// unlike the std distributions, so all sampling below goes through
/// uniform01/sample_index.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;
    static constexpr const char* kName = "xoshiro256**/splitmix64";

    explicit Xoshiro256(std::uint64_t seed) {
        for (auto& word : s_) word = splitmix64(seed);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Draw an index from an (unnormalized-safe) probability vector by inversion.
    template <typename Probs>
    std::size_t sample_index(const Probs& probs) {
        const double u = uniform01();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(probs.size()); ++i) {
            const double p = probs[i];
            if (p <= 0.0) continue;
            last_positive = i;
            acc += p;
            if (u < acc) return i;
        }
        return last_positive;  // rounding: u landed in the tail above the accumulated mass
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

/// Seed for an independent stream identified by (base seed, tag, index).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = base ^ h;
    splitmix64(state);
    state ^= index * 0xd1b54a32d192ed03ULL;
    return splitmix64(state);
}

}  // namespace agemdp
