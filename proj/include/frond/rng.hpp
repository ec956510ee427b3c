#pragma once

#include <cmath>
#include <cstdint>

namespace frond {

// Deterministic random source used everywhere seeded data is generated.
// splitmix64 plus a fixed Box-Muller mapping keeps seeded fixtures stable
// across standard-library versions; std:: distributions do not guarantee
// their output sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// All module seeds derive from one root seed through fixed stream ids:
//   0 graph synthesis, 1 feature synthesis, 2 attention weights,
//   3 coupling weights, 4 + s perturbation direction for sweep cell s.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    Rng rng(root ^ (0x517cc1b727220a95ULL * (stream + 1)));
    return rng.next_u64();
}

}  // namespace frond
