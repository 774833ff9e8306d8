#pragma once

#include <cmath>
#include <cstdint>

namespace pba {

// splitmix64 step: increments the state by a Weyl constant and mixes.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
    uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    return splitmix64(s);
}

// Counter-based generator; cheap to construct per pixel/texel so parallel
// decompositions cannot change the sample streams.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) { splitmix64(state_); }
    Rng(uint64_t seed, uint64_t stream) : Rng(hash_mix(seed, stream)) {}
    Rng(uint64_t seed, uint64_t s1, uint64_t s2) : Rng(hash_mix(hash_mix(seed, s1), s2)) {}

    uint64_t next() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
    }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace pba
