#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace flagctl::rng {

// splitmix64 step; also used to derive independent stream seeds from ids.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(seed ^ splitmix64(a + 0x632be59bd9b4e019ULL) ^
                      splitmix64(b + 0x9e6c63d0876a9a47ULL));
}

// Counter-based generator. All arithmetic is exactly specified, so streams
// are bit-identical across platforms and independent of std library
// distribution internals.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller
    double next_gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Radical-inverse (van der Corput) value of `index` in base `base`.
inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * double(index % base);
        index /= base;
    }
    return r;
}

// Halton point component d (0-based) at 1-based index, with a seeded
// digital shift so different seeds give different deterministic sequences.
inline double halton(std::uint64_t index, int d, std::uint64_t seed) {
    static constexpr std::uint32_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                               23, 29, 31, 37, 41, 43, 47, 53};
    const double shift =
        double(splitmix64(seed ^ (0x5851f42d4c957f2dULL * (d + 1))) >> 11) * 0x1.0p-53;
    double v = radical_inverse(index, primes[d % 16]) + shift;
    return v - std::floor(v);
}

} // namespace flagctl::rng
