#pragma once

#include "vortspec/fields.hpp"

namespace vortspec {

// Lambda = u . grad omega with u = grad-perp psi, psi = biot_savart(omega).
struct AdvectionResult {
    SpectralField projected;     // P Lambda
    HarmonicExpansion harmonic;  // P-perp Lambda
    double raw_l2_norm = 0.0;
    double residual = 0.0;       // unrepresented remainder
    GridField samples;           // Lambda on the grid
};

AdvectionResult advection(const SpectralField& omega, const GridPtr& grid);

// Quadrature of Lambda times the given field (vorticity or stream) over the disk.
double advection_pairing(const AdvectionResult& adv, const SpectralField& f);

struct EllipticCorrection {
    SpectralField omega_B;  // P psi_B on the eigenbasis
    GridField psi_B;        // closed form sampled on the grid
};

// Closed-form psi_B with Laplacian h/nu and zero trace, then omega_B = P psi_B,
// so that nu times the Laplacian of omega_B is h.
EllipticCorrection elliptic_correction(const HarmonicExpansion& h, double nu, const GridPtr& grid);

// Pointwise closed form of psi_B and its derivatives.
double elliptic_stream(const HarmonicExpansion& h, double nu, double r, double theta,
                       Derivative what = Derivative::value);

// (current.harmonic - previous.harmonic) / dt
HarmonicExpansion advection_time_derivative(const AdvectionResult& current,
                                            const AdvectionResult& previous, double dt);

}  // namespace vortspec
