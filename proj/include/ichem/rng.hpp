#pragma once

#include <array>
#include <cstdint>

namespace ichem {

// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
// block is a pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept;
};

// Random draws addressed by (seed, path, stream, index). Every draw is a
// pure function of its address, so paths can be simulated in any order or
// on any number of threads with identical results.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint32_t path) noexcept;

    // Two independent uniforms in the open interval (0, 1), 53 bits each.
    std::array<double, 2> uniforms(std::uint32_t stream, std::uint64_t index) const noexcept;

    // Standard normal variate (Box-Muller on the pair above).
    double normal(std::uint32_t stream, std::uint64_t index) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint32_t path() const noexcept { return path_; }

private:
    std::uint64_t seed_;
    std::uint32_t path_;
    Philox4x32::Key key_;
};

} // namespace ichem
