#pragma once

#include <cstddef>
#include <ostream>

#include "vortspec/fields.hpp"
#include "vortspec/semigroup.hpp"

namespace vortspec {

struct PressureOptions {
    int radial_cells = 400;   // uniform cell-centred auxiliary grid for the radial solves
    int angular_points = 0;   // 0: max(grid angles, 4K + 2)
};

struct PressureField {
    GridPtr grid;
    GridField values;   // p, quadrature mean removed
    GridField d_r;      // radial derivative of p
    GridField d_theta;  // angular derivative of p
    GridField phi;      // advective part Phi[u], mean removed
    double mean = 0.0;  // quadrature mean of values after normalization
    bool zero_mean = false;
    // |flux of the source through the disk - prescribed boundary flux| for the mean mode
    double compatibility_defect = 0.0;
};

// Conjugate on the harmonic basis: h_m^c -> h_m^s, h_m^s -> -h_m^c.
// Throws std::invalid_argument when the constant coefficient is nonzero.
HarmonicExpansion harmonic_conjugate(const HarmonicExpansion& h);

// Solution of Laplace(Phi) = -div((u . grad) u) with normal derivative -((u . grad) u) . n,
// u = grad-perp psi, solved per angular Fourier mode with second-order finite differences.
GridField phi_of_u(const SpectralField& omega, const GridPtr& grid, const PressureOptions& opt = {});

// p = Phi[u] + nu * conjugate of the harmonic extension of the boundary trace of omega.
PressureField recover_pressure(const SpectralField& omega, double nu, const GridPtr& grid,
                               const PressureOptions& opt = {});

struct MomentumResidual {
    double absolute = 0.0;  // L2 norm of u_t + (u . grad) u - nu Laplace(u) + grad p
    double scale = 0.0;     // ||grad p|| + ||u_t||
    double relative = 0.0;  // absolute / scale, 0 when both vanish
};

// Centred time difference between samples index - 1 and index + 1 of the trajectory.
MomentumResidual momentum_residual(const Trajectory& trajectory, std::size_t index, const GridPtr& grid,
                                   double nu, const PressureOptions& opt = {});

void write_pressure_csv(const PressureField& p, std::ostream& os);

}  // namespace vortspec
