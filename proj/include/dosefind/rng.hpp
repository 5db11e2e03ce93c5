#pragma once
// Counter-based random streams.
//
// A stream is addressed by (master_seed, replication, stream, substream). The
// tuple is folded into a 64-bit key with the SplitMix64 finaliser, and draw i of
// the stream is finalize(key + (i + 1) * 0x9E3779B97F4A7C15), i.e. SplitMix64
// started at `key`. The i-th draw is a pure function of the tuple and i, so
// traces do not depend on thread schedule or platform.

#include <cstdint>
#include <limits>

namespace dosefind {

namespace detail {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t absorb(std::uint64_t key, std::uint64_t word) noexcept {
    return splitmix_finalize(key ^ splitmix_finalize(word + kGolden));
}
}  // namespace detail

/// Purposes drawn from separate substreams so that, e.g., a recommendation
/// draw never shifts the outcome sequence.
enum class Substream : std::uint32_t { Outcomes = 0, Allocation = 1, Recommendation = 2 };

struct StreamId {
    std::uint64_t master_seed = 0;
    std::uint64_t replication = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// UniformRandomBitGenerator over one (stream id, substream) pair.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() = default;
    RngStream(const StreamId& id, Substream sub)
        : key_(detail::absorb(
              detail::absorb(detail::absorb(detail::absorb(0x6A09E667F3BCC909ULL, id.master_seed),
                                            id.replication),
                             id.stream),
              static_cast<std::uint64_t>(sub))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return detail::splitmix_finalize(key_ + counter_ * detail::kGolden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Stable 64-bit FNV-1a hash, used to derive stream ids from policy labels.
constexpr std::uint64_t stable_hash(const char* s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dosefind
