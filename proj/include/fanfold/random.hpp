#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fanfold/tensor.hpp"

namespace fanfold {

// xoshiro256** seeded through splitmix64. All randomness in a run flows from
// one of these so results are reproducible across library implementations
// (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    // uniform in [0, bound)
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }
    template <typename T>
    void shuffle(std::vector<T>& items) {
        shuffle(std::span<T>(items));
    }

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Uniform in ±sqrt(6 / (rows + cols)).
Tensor glorot_init(std::size_t rows, std::size_t cols, Rng& rng);
Tensor glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace fanfold
