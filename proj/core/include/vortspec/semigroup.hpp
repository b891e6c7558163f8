#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "vortspec/fields.hpp"

namespace vortspec {

struct DiagnosticsRow {
    double t = 0.0;
    double energy = 0.0;             // V_{-1} norm
    double enstrophy = 0.0;          // V_0 norm
    double palinstrophy_norm = 0.0;  // V_1 norm
    double moment_drift = 0.0;       // largest harmonic moment of omega
    double correction_norm = 0.0;    // V_0 norm of the elliptic correction
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;
    std::vector<DiagnosticsRow> diagnostics;  // empty or aligned with times

    // Appends a sample; times must increase strictly.
    void push(double t, SpectralField state, std::optional<DiagnosticsRow> row = std::nullopt);
    std::size_t size() const { return times.size(); }
    // Series of one diagnostics column, e.g. &DiagnosticsRow::energy.
    std::vector<double> column(double DiagnosticsRow::*member) const;
};

// Diagnostics of a vorticity field that carries no elliptic correction.
DiagnosticsRow linear_diagnostics(double t, const SpectralField& omega, double moment_drift = 0.0);

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

// Coefficients times exp(-nu lambda t).
SpectralField propagate(const SpectralField& field, double nu, double t);

// (e^z - 1)/z and (e^z - 1 - z)/z^2 with series branches near 0.
double phi1(double z);
double phi2(double z);

enum class EtdScheme { etd1, etd2rk };

using Forcing = std::function<SpectralField(double)>;
using Nonlinearity = std::function<SpectralField(const SpectralField&, double)>;

// One exponential time differencing step of u' = -nu lambda u + N(u, t).
SpectralField etd_step(const SpectralField& u, const Nonlinearity& rhs, double nu, double t,
                       double dt, EtdScheme scheme);

// The same for a state-independent forcing.
SpectralField duhamel_step(const SpectralField& u, const Forcing& forcing, double nu, double t,
                           double dt, EtdScheme scheme);

struct DecayFit {
    std::pair<double, double> window;
    double rate = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
};

// Least-squares slope of log(value) against t, returned as a positive decay rate.
// Without a window the last half of the time span is used.
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                        std::optional<std::pair<double, double>> window = std::nullopt);

}  // namespace vortspec
