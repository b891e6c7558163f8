#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vortspec/nonlinear.hpp"
#include "vortspec/semigroup.hpp"

namespace vortspec {

struct InitSpec {
    enum class Kind { modes, random };
    Kind kind = Kind::random;
    std::vector<std::pair<ModeIndex, double>> modes;
    std::optional<std::uint64_t> seed;  // required for random
};

// integrated: ETD2RK on the total vorticity with the correction folded into the
// right-hand side. lagged: omega_0 advanced with a backward difference of omega_B.
enum class Coupling { integrated, lagged };

struct RunConfig {
    double nu = 0.1;
    int K = 8;
    int J = 8;
    int quad_points = 0;      // 0: recommended_quad_points(K, J)
    int radial_points = 0;    // 0: quad points + 16
    int angular_points = 0;   // 0: max(3K + 1, 2K + 2) rounded up to even
    double dt = 1e-3;
    double T_final = 1.0;
    InitSpec init;
    int output_every = 10;    // steps between recorded samples
    double moment_tol = 1e-8;
    double cfl = 0.5;
    bool nonlinear = true;
    Coupling coupling = Coupling::integrated;

    // All violated constraints, empty when valid.
    std::vector<std::string> validate() const;
    int resolved_quad_points() const;
    int resolved_radial_points() const;
    int resolved_angular_points() const;
    int steps() const;
};

struct SolverState {
    double time = 0.0;
    long step = 0;
    SpectralField omega0;
    SpectralField omega_B;
    std::optional<AdvectionResult> prev_advection;  // advection of the current total vorticity
    SpectralField prev_omega_B;                      // lagged coupling only

    SpectralField omega() const { return omega0 + omega_B; }
};

class NsSolver {
public:
    explicit NsSolver(RunConfig cfg);

    const RunConfig& config() const { return cfg_; }
    const TablePtr& table() const { return table_; }
    const GridPtr& grid() const { return grid_; }

    SpectralField initial_vorticity() const;
    SolverState initial_state() const;
    SolverState state_from(const SpectralField& omega, double t = 0.0) const;

    // omega_B for a given harmonic part of the advection (linear map, cached basis).
    SpectralField correction_from(const HarmonicExpansion& h) const;

    // Semi-discrete right-hand side beyond -nu lambda omega, with the advection used.
    SpectralField rhs(const SpectralField& omega, AdvectionResult* adv = nullptr) const;

    SolverState step(const SolverState& s) const;
    Trajectory run() const;

    // Without advection; optional forcing in the eigenbasis.
    Trajectory stokes_run(const Forcing& forcing = nullptr) const;

    DiagnosticsRow diagnostics(const SolverState& s) const;
    // Largest harmonic moment of a vorticity field on this grid.
    double max_moment(const SpectralField& omega) const;
    // dt * max|u| * sqrt(lambda_max)
    double cfl_number(const SpectralField& omega) const;
    // d/dt of half the squared V_0 norm under the semi-discrete dynamics.
    double enstrophy_rate(const SpectralField& omega) const;

private:
    RunConfig cfg_;
    TablePtr table_;
    GridPtr grid_;
    std::vector<SpectralField> response_c_, response_s_;
};

}  // namespace vortspec
