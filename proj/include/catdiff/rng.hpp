#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <random>
#include <span>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace catdiff {

/// (seed, stream) pair identifying one independent random sequence.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Random source owned by one chain or one generator.
///
/// The engine (mt19937_64) and the boost.random distributions are fully
/// specified algorithms, so a given RngSpec yields the same sequence on every
/// conforming platform. std:: distributions are avoided for that reason.
class Rng {
public:
    explicit Rng(RngSpec spec) : spec_(spec) {
        std::uint64_t state = spec.seed;
        std::uint64_t a = detail::splitmix64(state);
        state ^= spec.stream * 0xd1b54a32d192ed03ULL;
        std::uint64_t b = detail::splitmix64(state);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        engine_.seed(seq);
    }

    const RngSpec& spec() const noexcept { return spec_; }

    /// Uniform on [0, 1).
    double uniform() { return boost::random::uniform_01<double>{}(engine_); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn with probability proportional to `weights` (nonnegative,
    /// not necessarily normalized). Returns the last positive index if
    /// rounding pushes the target past the cumulative total.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double target = uniform() * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last_positive = i;
            if (target < acc) return i;
        }
        return last_positive;
    }

    double gamma(double shape) { return boost::random::gamma_distribution<double>(shape, 1.0)(engine_); }

    /// log of a Gamma(shape, 1) draw. For shape < 1 uses
    /// G(a) = G(a + 1) * U^{1/a}, kept in log scale so tiny shapes never
    /// underflow to an all-zero Dirichlet.
    double log_gamma_variate(double shape) {
        if (shape >= 1.0) return std::log(gamma(shape));
        const double boosted = std::log(gamma(shape + 1.0));
        double u = uniform();
        while (u == 0.0) u = uniform();
        return boosted + std::log(u) / shape;
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    RngSpec spec_;
    std::mt19937_64 engine_;
};

}  // namespace catdiff
