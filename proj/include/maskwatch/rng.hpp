#pragma once

#include <cstdint>
#include <random>

namespace maskwatch {

/// Seeded generator whose output is identical on every platform: the engine is
/// bit-specified by the standard and every transform below is written out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    bool bernoulli(double p) { return uniform() < p; }
    long poisson(double lambda);

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0;
    bool has_spare_ = false;
};

/// Derives an independent stream seed from a base seed and a stream index (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace maskwatch
