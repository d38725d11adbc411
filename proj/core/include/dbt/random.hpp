#pragma once

#include <cstdint>
#include <random>

namespace dbt {

/// Seed splitting rule for independent parallel tasks: task i of a run seeded
/// with `base` uses splitmix64 applied to base xor (i+1)*golden. Documented so
/// that fan-out results are reproducible independent of scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Deterministic RNG wrapper. Gaussian variates use the Marsaglia polar
/// method on top of mt19937_64 so the stream does not depend on the standard
/// library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01();   ///< uniform in [0, 1)
    double gaussian();    ///< standard normal

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dbt
