#pragma once

// Small seeded generators for property tests.

#include <cstdint>
#include <random>
#include <vector>

namespace flexlab::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p_true = 0.5) { return std::bernoulli_distribution(p_true)(rng_); }

    template <class T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(integer(0, static_cast<int>(items.size()) - 1))];
    }

    std::uint64_t next() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

}  // namespace flexlab::testing
