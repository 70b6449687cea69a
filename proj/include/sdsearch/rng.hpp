#pragma once

#include <cstdint>
#include <string_view>

namespace sdsearch {

// Counter-based random stream.
//
// Each stream is identified by (seed, stream_id). The n-th variate is a pure
// function of (seed, stream_id, n): the 192 bits are mixed through three
// rounds of the SplitMix64 finalizer (Steele, Lea & Flood 2014). Streams can
// therefore be created cheaply for any (consumer, draw, purpose) tuple,
// consumed lazily, and partitioned across threads without any shared state;
// results never depend on scheduling or thread count.
//
// This generator is fixed. Changing it silently would alter every seeded
// artifact, so any replacement must be versioned explicitly.

namespace detail {
inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

class RandomStream {
  public:
    RandomStream() : base_(0), counter_(0) {}
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
        : base_(detail::mix64(detail::mix64(seed + detail::golden_gamma) ^
                              (stream_id * detail::golden_gamma + 1))),
          counter_(0) {}

    std::uint64_t next_u64() {
        return detail::mix64(base_ + (++counter_) * detail::golden_gamma);
    }

    // Uniform on the open interval (0,1); never returns 0 or 1 so it can be
    // pushed through quantile functions of unbounded distributions.
    double next_uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Value of the n-th uniform of this stream without advancing state.
    double uniform_at(std::uint64_t n) const {
        const std::uint64_t u = detail::mix64(base_ + (n + 1) * detail::golden_gamma);
        return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t counter() const { return counter_; }
    void skip(std::uint64_t n) { counter_ += n; }

  private:
    std::uint64_t base_;
    std::uint64_t counter_;
};

// Stable sub-seed derivation: FNV-1a over a purpose label folded into the
// user seed. Used so CLI subcommands draw from disjoint streams that do not
// depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return detail::mix64(seed ^ h);
}

}  // namespace sdsearch
