#include "vortspec/nonlinear.hpp"

#include <cmath>
#include <stdexcept>

#include "vortspec/parallel.hpp"

namespace vortspec {

AdvectionResult advection(const SpectralField& omega, const GridPtr& grid)
{
    if (omega.kind != FieldKind::vorticity) throw std::invalid_argument("advection needs vorticity");
    const int K = omega.table->max_angular();
    if (grid->nt() < 3 * K + 1) throw std::invalid_argument("grid violates the anti-aliasing bound");

    const SpectralField psi = biot_savart(omega);
    const GridField pr = to_grid(psi, grid, Derivative::d_r);
    const GridField pt = to_grid(psi, grid, Derivative::d_theta);
    const GridField wr = to_grid(omega, grid, Derivative::d_r);
    const GridField wt = to_grid(omega, grid, Derivative::d_theta);

    AdvectionResult res;
    res.samples = GridField::zeros(grid);
    const int M = grid->nt();
    // Gauss-Legendre nodes exclude r = 0, so the 1/r factor is always finite.
    parallel_for(static_cast<std::size_t>(grid->nr()), [&](std::size_t i) {
        const double inv_r = 1.0 / grid->r(static_cast<int>(i));
        for (int m = 0; m < M; ++m) {
            const int ii = static_cast<int>(i);
            res.samples.at(ii, m) =
                inv_r * (pr.at(ii, m) * wt.at(ii, m) - pt.at(ii, m) * wr.at(ii, m));
        }
    });
    Decomposition d = from_grid(res.samples, omega.table);
    res.projected = std::move(d.projected);
    res.harmonic = std::move(d.harmonic);
    res.residual = d.residual;
    res.raw_l2_norm = l2_norm(res.samples);
    return res;
}

double advection_pairing(const AdvectionResult& adv, const SpectralField& f)
{
    return inner(adv.samples, to_grid(f, adv.samples.grid));
}

namespace {

// Radial factor (r^{m+2} - r^m) / (4m + 4) and its derivatives.
void radial_factor(int m, double r, double& f, double& df, double& d2f)
{
    const double s = 1.0 / (4.0 * m + 4.0);
    f = s * (std::pow(r, m + 2) - std::pow(r, m));
    df = s * ((m + 2) * std::pow(r, m + 1) - (m >= 1 ? m * std::pow(r, m - 1) : 0.0));
    d2f = s * ((m + 2) * (m + 1) * std::pow(r, m) - (m >= 2 ? m * (m - 1) * std::pow(r, m - 2) : 0.0));
}

}  // namespace

double elliptic_stream(const HarmonicExpansion& h, double nu, double r, double theta, Derivative what)
{
    if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    double v = 0.0;
    for (int m = 0; m <= h.degree; ++m) {
        const double a = harmonic_normalizer(m) / nu;
        const double c = a * h.c[m], s = a * h.s[m];
        if (c == 0.0 && s == 0.0) continue;
        double f, df, d2f;
        radial_factor(m, r, f, df, d2f);
        const double cm = std::cos(m * theta), sm = std::sin(m * theta);
        const double tv = c * cm + s * sm;
        const double td = m * (-c * sm + s * cm);
        switch (what) {
            case Derivative::value: v += f * tv; break;
            case Derivative::d_r: v += df * tv; break;
            case Derivative::d_rr: v += d2f * tv; break;
            case Derivative::d_theta: v += f * td; break;
            case Derivative::d_rtheta: v += df * td; break;
            case Derivative::d_thetatheta: v -= static_cast<double>(m * m) * f * tv; break;
        }
    }
    return v;
}

EllipticCorrection elliptic_correction(const HarmonicExpansion& h, double nu, const GridPtr& grid)
{
    if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    EllipticCorrection out;
    out.psi_B = GridField::zeros(grid);
    const int M = grid->nt();
    for (int m = 0; m <= h.degree; ++m) {
        const double a = harmonic_normalizer(m) / nu;
        const double c = a * h.c[m], s = a * h.s[m];
        if (c == 0.0 && s == 0.0) continue;
        for (int i = 0; i < grid->nr(); ++i) {
            double f, df, d2f;
            radial_factor(m, grid->r(i), f, df, d2f);
            for (int q = 0; q < M; ++q) {
                const double th = grid->theta(q);
                out.psi_B.at(i, q) += f * (c * std::cos(m * th) + s * std::sin(m * th));
            }
        }
    }
    out.omega_B = from_grid(out.psi_B, grid->table_ptr()).projected;
    return out;
}

HarmonicExpansion advection_time_derivative(const AdvectionResult& current,
                                            const AdvectionResult& previous, double dt)
{
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    HarmonicExpansion d = current.harmonic;
    d -= previous.harmonic;
    d *= 1.0 / dt;
    return d;
}

}  // namespace vortspec
