#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace surro {

// Seeded random stream. One stream per replication; substreams are derived
// from (seed, stream_id) so replications are reproducible and independent.
//
// All samplers are implemented on top of raw engine bits rather than
// std::*_distribution, which are not specified bit-exactly across standard
// library implementations.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id),
          engine_(mix(mix(seed) ^ mix(stream_id * 0x9E3779B97F4A7C15ull + 1))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Derive an independent child stream, keyed by a small label.
    RngStream child(std::uint64_t label) const {
        return RngStream(mix(seed_ ^ mix(label + 0x1234567)), stream_id_);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe as a log argument.
    double uniform_pos() { return 1.0 - uniform(); }

    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        // rejection to avoid modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = engine_(); } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller (second value discarded so the draw
    // count per call is input-independent).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double rate) {
        if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
        return -std::log(uniform_pos()) / rate;
    }

    // Gamma under the shape-scale convention (mean = shape * scale).
    // Marsaglia-Tsang squeeze for shape >= 1, boost transform below 1.
    double gamma(double shape, double scale) {
        if (shape <= 0.0 || scale <= 0.0)
            throw std::invalid_argument("gamma: shape and scale must be positive");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
                return d * v * scale;
        }
    }

    double lognormal(double mu, double sigma) {
        if (sigma < 0.0) throw std::invalid_argument("lognormal: sigma must be nonnegative");
        return std::exp(mu + sigma * normal());
    }

    // Poisson count by inversion of the exponential product (Knuth); chunked
    // so exp(-rate) never underflows.
    std::uint64_t poisson(double rate) {
        if (rate < 0.0) throw std::invalid_argument("poisson: rate must be nonnegative");
        std::uint64_t total = 0;
        while (rate > 500.0) {
            total += poisson_knuth(500.0);
            rate -= 500.0;
        }
        return total + poisson_knuth(rate);
    }

private:
    std::uint64_t poisson_knuth(double rate) {
        if (rate == 0.0) return 0;
        const double threshold = std::exp(-rate);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > threshold);
        return k - 1;
    }

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

}  // namespace surro
