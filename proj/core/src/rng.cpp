#include "ecoroute/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ecoroute {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Rng Rng::stream(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = fnv1a64(tag);
    // Mix the seed into the tag hash; identical tags with different seeds
    // (and vice versa) land in unrelated states.
    h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return Rng(h);
}

std::uint64_t Rng::next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be > 0");
    // Rejection sampling to avoid modulo bias.
    std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= bound);
    return x % n;
}

std::uint64_t Rng::next_poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("next_poisson: mean must be finite and >= 0");
    std::uint64_t total = 0;
    while (mean > 300.0) {
        total += next_poisson(300.0);
        mean -= 300.0;
    }
    if (mean == 0.0) return total;
    const double limit = std::exp(-mean);
    double prod = next_double();
    std::uint64_t k = 0;
    while (prod > limit) {
        ++k;
        prod *= next_double();
    }
    return total + k;
}

} // namespace ecoroute
