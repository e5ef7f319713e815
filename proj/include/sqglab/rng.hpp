#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sqglab {

/// Counter-based random stream. Each draw hashes (seed, stream, counter)
/// through the splitmix64 finalizer, so streams are stateless apart from the
/// counter and reproduce bit-for-bit for a fixed (seed, stream) pair on any
/// platform. Module code receives streams, never global state.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    RngStream(std::uint64_t seed, std::string_view stream_name)
        : RngStream(seed, fnv1a(stream_name)) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * (++counter_);
        z ^= stream_ * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (no cached spare, keeps draws counter-pure).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        u1 = u1 > 0.0 ? u1 : 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return h;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace sqglab
