#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace streamfdr {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from (seed, stream index). Replications
// seeded this way are order-independent, so Monte-Carlo loops can run in any
// order (or in parallel) and still produce identical results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// mt19937_64 with hand-rolled output distributions. The standard specifies the
// engine bit-for-bit but not the distributions, and the outputs here must be
// byte-identical across platforms (results.csv determinism).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        return Rng(derive_seed(seed, stream));
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Marsaglia polar method with a cached spare.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, w;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            w = u * u + v * v;
        } while (w >= 1.0 || w == 0.0);
        double f = std::sqrt(-2.0 * std::log(w) / w);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // Bailey's polar method for the t distribution.
    double student_t(int nu) {
        double u, v, w;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            w = u * u + v * v;
        } while (w >= 1.0 || w == 0.0);
        double c = std::sqrt(static_cast<double>(nu) * (std::pow(w, -2.0 / nu) - 1.0) / w);
        return u * c;
    }

    // Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = eng_();
            if (r >= threshold) return r % n;
        }
    }

    template <class It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            std::uint64_t j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_{false};
    double spare_{0};
};

}  // namespace streamfdr
