#pragma once

#include <cstdint>
#include <string_view>

namespace ecoroute {

// SplitMix64 generator. Chosen over std::mt19937 + std distributions because
// the standard distributions are not bit-reproducible across library
// implementations, and run outputs must be byte-identical for a given seed.
//
// Stream splitting: each subsystem draws from its own stream, derived from
// (run seed, stream tag). Adding a new subsystem with a new tag never
// perturbs the draws of existing streams.
class Rng {
public:
    Rng() = default;
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derive an independent stream for a subsystem from a run seed.
    // Tags in use: "arrivals", "fleet".
    static Rng stream(std::uint64_t seed, std::string_view tag);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Poisson-distributed count with the given mean. Inversion by sequential
    // search; means above 300 are split into chunks and summed, which keeps
    // exp(-mean) in normal double range for any realistic demand level.
    std::uint64_t next_poisson(double mean);

private:
    std::uint64_t state_ = 0x9e3779b97f4a7c15ull;
};

// FNV-1a 64-bit hash, used for stream derivation and input-file manifests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ull);

} // namespace ecoroute
