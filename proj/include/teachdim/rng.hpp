#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace teachdim {

// Session random stream. Wraps mt19937_64 but maps raw 64-bit draws to
// ranges by hand so that sequences are identical across standard library
// implementations (std distributions are not specified bit-exactly).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::seed_seq seq{seed};
        gen_.seed(seq);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Modulo bias is below n / 2^64.
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Draws an index from an (unnormalized up to 1e-9) discrete distribution.
    // Falls back to the last positive-weight index if rounding ate the tail.
    template <class Weighted, class WeightFn>
    int sample_discrete(std::span<const Weighted> items, WeightFn weight) {
        double u = next_double();
        double acc = 0.0;
        int last_positive = 0;
        for (int i = 0; i < static_cast<int>(items.size()); ++i) {
            double w = weight(items[i]);
            if (w > 0.0) last_positive = i;
            acc += w;
            if (u < acc) return i;
        }
        return last_positive;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace teachdim
