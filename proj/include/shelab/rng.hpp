#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "shelab/grid.hpp"

namespace shelab {

/// Names one noise stream: the ensemble master seed plus the path index.
/// The derived stream is a pure function of both, so path p can be
/// regenerated without touching paths 0..p-1 and independently of how the
/// ensemble is split across workers.
struct SeedScheme {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

/// Counter-based stream (Philox-4x32-10, Salmon et al. 2011).
///
/// The key holds the master seed, two counter words hold the path index and
/// the remaining two words count emitted blocks. Distinct (seed, path) pairs
/// therefore index disjoint counter blocks of one keyed bijection.
class CounterStream {
public:
    explicit CounterStream(SeedScheme seed) noexcept
        : key0_(static_cast<std::uint32_t>(seed.master_seed)),
          key1_(static_cast<std::uint32_t>(seed.master_seed >> 32)),
          stream0_(static_cast<std::uint32_t>(seed.path_index)),
          stream1_(static_cast<std::uint32_t>(seed.path_index >> 32)) {}

    std::uint64_t next_u64() noexcept {
        if (block_pos_ == 2) refill();
        const std::uint64_t lo = block_[2 * block_pos_];
        const std::uint64_t hi = block_[2 * block_pos_ + 1];
        ++block_pos_;
        return (hi << 32) | lo;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double next_uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via the Marsaglia polar method.
    double next_gaussian() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double a, b, s;
        do {
            a = 2.0 * next_uniform() - 1.0;
            b = 2.0 * next_uniform() - 1.0;
            s = a * a + b * b;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = b * m;
        have_spare_ = true;
        return a * m;
    }

private:
    void refill() noexcept {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_counter_ >> 32);
        std::uint32_t c2 = stream0_;
        std::uint32_t c3 = stream1_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_[0] = c0;
        block_[1] = c1;
        block_[2] = c2;
        block_[3] = c3;
        ++block_counter_;
        block_pos_ = 0;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t stream0_, stream1_;
    std::uint64_t block_counter_ = 0;
    std::uint32_t block_[4] = {};
    int block_pos_ = 2; // forces refill on first draw
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline CounterStream derive_stream(const SeedScheme& seed) noexcept {
    return CounterStream(seed);
}

/// Fills `out` with i.i.d. N(0, dt*dx) values, the white-noise mass of one
/// space-time cell. The solver divides by dx to form the forcing term.
inline void sample_noise_layer(const GridSpec& grid, CounterStream& stream,
                               std::span<double> out) {
    const double scale = std::sqrt(grid.dt * grid.dx);
    for (double& w : out) w = scale * stream.next_gaussian();
}

inline std::vector<double> sample_noise_layer(const GridSpec& grid, CounterStream& stream) {
    std::vector<double> layer(grid.n_cells);
    sample_noise_layer(grid, stream, layer);
    return layer;
}

} // namespace shelab
