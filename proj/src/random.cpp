#include "mixval/random.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace mixval {

double Rng::uniform() {
    boost::random::uniform_01<double> u;
    for (;;) {
        const double v = u(engine_);
        if (v > 0.0 && v < 1.0) return v;
    }
}

double Rng::normal() {
    boost::random::normal_distribution<double> n(0.0, 1.0);
    return n(engine_);
}

double Rng::gamma(double shape) {
    boost::random::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
}

double Rng::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double s = x + y;
    if (s <= 0.0) {
        // both shapes tiny and both gammas underflowed; fall back on the mean
        return a / (a + b);
    }
    return x / s;
}

bool Rng::bernoulli(double p) { return uniform() < p; }

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
    return z;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return splitmix64(splitmix64(parent) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

}  // namespace mixval
