#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surro/rng.hpp"

namespace surro {

// Parametric input distribution. Gamma uses the shape-scale convention
// (mean = shape * scale); see the shipped config for the one-line switch
// if a rate convention is ever wanted.
struct DistributionSpec {
    enum class Kind { Gamma, Lognormal, Exponential, Deterministic };

    Kind kind = Kind::Deterministic;
    double a = 0.0;  // shape | mu    | rate | value
    double b = 0.0;  // scale | sigma | -    | -

    static DistributionSpec gamma(double shape, double scale);
    static DistributionSpec lognormal(double mu, double sigma);
    static DistributionSpec lognormal_from_moments(double mean, double variance);
    static DistributionSpec exponential(double rate);
    static DistributionSpec deterministic(double value);

    double sample(RngStream& stream) const;
    double mean() const;
    double variance() const;
    std::string kind_name() const;
};

// (mu, sigma) of a lognormal with the given mean and variance.
std::pair<double, double> lognormal_params_from_moments(double mean, double variance);

// Arrival epochs of a Poisson process over one epoch: count ~ Poisson(rate),
// times i.i.d. uniform, returned sorted ascending in [0, epoch_length).
std::vector<double> sample_arrivals(RngStream& stream, double rate_per_epoch,
                                    double epoch_length);

// Fitted exogenous-input models driving the generative surrogate.
struct InputModels {
    std::array<double, 2> arrival_rate_per_epoch{};
    std::array<DistributionSpec, 2> service{};
    std::array<DistributionSpec, 2> patience{};
    DistributionSpec backoffice_duration{};
};

// Poisson-rate MLE per contact group from recorded per-epoch arrival counts;
// the parametric service/patience/back-office specs are carried over from the
// known configuration.
InputModels fit_input_models(const std::vector<std::array<int, 2>>& arrival_counts,
                             const std::array<DistributionSpec, 2>& service,
                             const std::array<DistributionSpec, 2>& patience,
                             const DistributionSpec& backoffice_duration);

}  // namespace surro
