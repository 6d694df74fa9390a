#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace cn {

// Seeded RNG stream. Every trial owns exactly one of these; all random
// choices (initialization, shuffling, noise sampling) draw from it in a
// fixed, documented order so runs with the same seed are bit-identical.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double gaussian() { return normal_(gen_); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), gen_);
    }

    uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cn
