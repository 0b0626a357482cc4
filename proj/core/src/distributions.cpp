#include "surro/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace surro {

DistributionSpec DistributionSpec::gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
        throw std::invalid_argument("gamma: shape and scale must be positive");
    return {Kind::Gamma, shape, scale};
}

DistributionSpec DistributionSpec::lognormal(double mu, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("lognormal: sigma must be nonnegative");
    return {Kind::Lognormal, mu, sigma};
}

DistributionSpec DistributionSpec::lognormal_from_moments(double mean, double variance) {
    auto [mu, sigma] = lognormal_params_from_moments(mean, variance);
    return {Kind::Lognormal, mu, sigma};
}

DistributionSpec DistributionSpec::exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
    return {Kind::Exponential, rate, 0.0};
}

DistributionSpec DistributionSpec::deterministic(double value) {
    if (value < 0.0) throw std::invalid_argument("deterministic: value must be nonnegative");
    return {Kind::Deterministic, value, 0.0};
}

double DistributionSpec::sample(RngStream& stream) const {
    switch (kind) {
        case Kind::Gamma: return stream.gamma(a, b);
        case Kind::Lognormal: return stream.lognormal(a, b);
        case Kind::Exponential: return stream.exponential(a);
        case Kind::Deterministic: return a;
    }
    throw std::logic_error("unreachable");
}

double DistributionSpec::mean() const {
    switch (kind) {
        case Kind::Gamma: return a * b;
        case Kind::Lognormal: return std::exp(a + 0.5 * b * b);
        case Kind::Exponential: return 1.0 / a;
        case Kind::Deterministic: return a;
    }
    throw std::logic_error("unreachable");
}

double DistributionSpec::variance() const {
    switch (kind) {
        case Kind::Gamma: return a * b * b;
        case Kind::Lognormal: {
            const double s2 = b * b;
            return (std::exp(s2) - 1.0) * std::exp(2.0 * a + s2);
        }
        case Kind::Exponential: return 1.0 / (a * a);
        case Kind::Deterministic: return 0.0;
    }
    throw std::logic_error("unreachable");
}

std::string DistributionSpec::kind_name() const {
    switch (kind) {
        case Kind::Gamma: return "gamma";
        case Kind::Lognormal: return "lognormal";
        case Kind::Exponential: return "exponential";
        case Kind::Deterministic: return "deterministic";
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> lognormal_params_from_moments(double mean, double variance) {
    if (mean <= 0.0 || variance <= 0.0)
        throw std::invalid_argument("lognormal moments: mean and variance must be positive");
    const double sigma2 = std::log(1.0 + variance / (mean * mean));
    const double mu = std::log(mean) - 0.5 * sigma2;
    return {mu, std::sqrt(sigma2)};
}

std::vector<double> sample_arrivals(RngStream& stream, double rate_per_epoch,
                                    double epoch_length) {
    if (rate_per_epoch < 0.0)
        throw std::invalid_argument("sample_arrivals: rate must be nonnegative");
    const std::uint64_t n = stream.poisson(rate_per_epoch);
    std::vector<double> times(n);
    for (auto& t : times) t = stream.uniform() * epoch_length;
    std::sort(times.begin(), times.end());
    return times;
}

InputModels fit_input_models(const std::vector<std::array<int, 2>>& arrival_counts,
                             const std::array<DistributionSpec, 2>& service,
                             const std::array<DistributionSpec, 2>& patience,
                             const DistributionSpec& backoffice_duration) {
    if (arrival_counts.empty())
        throw std::invalid_argument("fit_input_models: no recorded epochs");
    InputModels models;
    for (int g = 0; g < 2; ++g) {
        double sum = 0.0;
        for (const auto& c : arrival_counts) sum += c[g];
        models.arrival_rate_per_epoch[g] = sum / static_cast<double>(arrival_counts.size());
    }
    models.service = service;
    models.patience = patience;
    models.backoffice_duration = backoffice_duration;
    return models;
}

}  // namespace surro
