#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace mixval {

/// Random stream owned by one chain or one simulator call.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; the variate transforms come from Boost.Random so draws are the
/// same on every platform for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();           // (0, 1), never returns an endpoint
    double normal();            // N(0, 1)
    double gamma(double shape); // Gamma(shape, 1)
    double beta(double a, double b);
    bool bernoulli(double p);
    Eigen::VectorXd normal_vector(Eigen::Index n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over bytes, used for scenario and config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Mixes a parent seed with an index into a child seed. Distinct (parent, index)
/// pairs give distinct streams with overwhelming probability.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace mixval
