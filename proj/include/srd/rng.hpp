#pragma once

// Reproducible random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), state seeded by four rounds of
// splitmix64.  Uniform doubles take the top 53 bits.  Standard normals come
// from the Box–Muller transform, consumed in pairs (the second value of a
// pair is cached in the generator state).  Independent streams for parallel
// runs are keyed by derive_seed(master, index), so results never depend on
// scheduling.  The standard library distributions are avoided on purpose:
// their output is implementation-defined.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace srd {

/// One splitmix64 step applied to `x` (a bijective 64-bit mixer).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of stream `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Generator for stream `index` of `master`.
    static Rng stream(std::uint64_t master, std::uint64_t index) noexcept { return Rng(derive_seed(master, index)); }

    std::uint64_t next() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1].
    double uniform_open_left() noexcept;
    double normal() noexcept;
    void fill_normal(std::span<double> out) noexcept;

    bool operator==(const Rng&) const = default;

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// `n` independent N(0,1) draws.
std::vector<double> gaussian_increments(Rng& rng, std::size_t n);

}  // namespace srd
