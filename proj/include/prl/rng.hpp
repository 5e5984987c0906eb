#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace prl {

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic RNG used everywhere in the pipeline. mt19937_64 provides the
// raw stream (standardized, so identical across platforms); all variate
// transforms are implemented here rather than through std:: distributions,
// whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t u64() { return eng_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t index(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    double normal();
    double exponential(double rate);
    double gamma(double shape);            // scale 1
    std::vector<double> dirichlet(const std::vector<double>& alpha);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[index(i)]);
    }

    // k distinct indices from [0, n), uniform without replacement.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    // Independent stream keyed off this RNG's seed; stable regardless of how
    // many draws have been consumed from the parent.
    Rng child(std::uint64_t stream) const {
        return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL)));
    }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 eng_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

} // namespace prl
