#include "vortspec/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vortspec/format.hpp"
#include "vortspec/parallel.hpp"

namespace vortspec {

HarmonicExpansion harmonic_conjugate(const HarmonicExpansion& h)
{
    if (std::abs(h.c[0]) > 1e-12 * (1.0 + h.max_abs())) {
        throw std::invalid_argument("harmonic conjugate needs a zero-mean input");
    }
    HarmonicExpansion out = HarmonicExpansion::zeros(h.degree);
    for (int m = 1; m <= h.degree; ++m) {
        out.c[m] = -h.s[m];
        out.s[m] = h.c[m];
    }
    return out;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Angular Fourier profiles of Phi on cell centres r_i = (i + 1/2) h.
struct PhiModes {
    int degree = 0;
    int cells = 0;
    double h = 0.0;
    std::vector<std::vector<double>> c, s;  // [m][i]
    double defect = 0.0;
};

// Tridiagonal solve, sub a, diagonal b, super c; overwrites d with the solution.
void thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& d)
{
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    if (!(std::abs(b[n - 1]) > 0.0)) throw std::runtime_error("radial Neumann solve is singular");
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

// (1/r)(r f')' - m^2 f / r^2 = F with r f'(1) = g; the mean mode is integrated as a cumulative flux.
std::vector<double> radial_solve(int m, const std::vector<double>& F, double g, double h, double* defect)
{
    const int N = static_cast<int>(F.size());
    std::vector<double> f(N, 0.0);
    if (m == 0) {
        double flux = 0.0;
        for (int i = 0; i < N; ++i) {
            flux += F[i] * (i + 0.5) * h * h;
            if (i + 1 < N) f[i + 1] = f[i] + flux / (i + 1);
        }
        if (defect) *defect = std::abs(flux - g);
        return f;
    }
    std::vector<double> a(N), b(N), c(N), d(F);
    const double m2 = static_cast<double>(m) * m;
    for (int i = 0; i < N; ++i) {
        const double r = (i + 0.5) * h, rm = i * h, rp = (i + 1) * h;
        a[i] = rm / (r * h * h);
        c[i] = i + 1 < N ? rp / (r * h * h) : 0.0;
        b[i] = -(rm + (i + 1 < N ? rp : 0.0)) / (r * h * h) - m2 / (r * r);
        if (i + 1 == N) d[i] -= g / (r * h);
    }
    thomas(a, b, c, d);
    return d;
}

PhiModes solve_phi(const SpectralField& omega, int cells, int angles)
{
    const TablePtr& t = omega.table;
    const int K = t->max_angular();
    const int deg = 2 * K;
    const SpectralField psi = biot_savart(omega);

    const double h = 1.0 / cells;
    std::vector<double> radii(cells + 1);
    for (int i = 0; i < cells; ++i) radii[i] = (i + 0.5) * h;
    radii[cells] = 1.0;
    const RadialProfiles prof = make_profiles(*t, radii);

    std::vector<double> cosv(static_cast<std::size_t>(deg + 1) * angles), sinv(cosv.size());
    for (int m = 0; m <= deg; ++m) {
        for (int q = 0; q < angles; ++q) {
            const double th = 2 * kPi * q / angles;
            cosv[static_cast<std::size_t>(m) * angles + q] = std::cos(m * th);
            sinv[static_cast<std::size_t>(m) * angles + q] = std::sin(m * th);
        }
    }

    PhiModes out;
    out.degree = deg;
    out.cells = cells;
    out.h = h;
    // source Fourier coefficients [m][i], and the boundary flux data
    std::vector<std::vector<double>> Fc(deg + 1, std::vector<double>(cells)), Fs = Fc;
    std::vector<double> gc(deg + 1, 0.0), gs(deg + 1, 0.0);

    parallel_for(radii.size(), [&](std::size_t i) {
        const double r = radii[i];
        // per-k radial coefficients of psi and two radial derivatives
        std::vector<double> ac(K + 1, 0.0), as(K + 1, 0.0), dac = ac, das = as, d2ac = ac, d2as = as;
        for (std::size_t n = 0; n < t->size(); ++n) {
            const ModeIndex& mode = t->modes()[n];
            const double v = psi[n];
            if (v == 0.0) continue;
            auto& A = mode.parity == Parity::cosine ? ac : as;
            auto& dA = mode.parity == Parity::cosine ? dac : das;
            auto& d2A = mode.parity == Parity::cosine ? d2ac : d2as;
            A[mode.k] += v * prof.sig[n][i];
            dA[mode.k] += v * prof.dsig[n][i];
            d2A[mode.k] += v * prof.d2sig[n][i];
        }
        std::vector<double> src(angles);
        for (int q = 0; q < angles; ++q) {
            double p_r = 0, p_rr = 0, p_t = 0, p_rt = 0, p_tt = 0;
            for (int k = 0; k <= K; ++k) {
                const double ck = cosv[static_cast<std::size_t>(k) * angles + q];
                const double sk = sinv[static_cast<std::size_t>(k) * angles + q];
                p_r += dac[k] * ck + das[k] * sk;
                p_rr += d2ac[k] * ck + d2as[k] * sk;
                p_t += k * (-ac[k] * sk + as[k] * ck);
                p_rt += k * (-dac[k] * sk + das[k] * ck);
                p_tt -= static_cast<double>(k * k) * (ac[k] * ck + as[k] * sk);
            }
            if (i < static_cast<std::size_t>(cells)) {
                const double cross = p_rt / r - p_t / (r * r);
                src[q] = 2.0 * (p_rr * (p_r / r + p_tt / (r * r)) - cross * cross);
            } else {
                // -((u . grad) u) . e_r with u_r = -psi_theta / r, u_theta = psi_r
                const double ur = -p_t / r, ut = p_r;
                const double dur_dr = p_t / (r * r) - p_rt / r, dur_dt = -p_tt / r;
                src[q] = -(ur * dur_dr + ut * dur_dt / r - ut * ut / r);
            }
        }
        for (int m = 0; m <= deg; ++m) {
            double sc = 0, ss = 0;
            for (int q = 0; q < angles; ++q) {
                sc += src[q] * cosv[static_cast<std::size_t>(m) * angles + q];
                ss += src[q] * sinv[static_cast<std::size_t>(m) * angles + q];
            }
            const double w = (m == 0 ? 1.0 : 2.0) / angles;
            if (i < static_cast<std::size_t>(cells)) {
                Fc[m][i] = w * sc;
                Fs[m][i] = w * ss;
            } else {
                gc[m] = w * sc;
                gs[m] = w * ss;
            }
        }
    });

    out.c.assign(deg + 1, {});
    out.s.assign(deg + 1, std::vector<double>(cells, 0.0));
    parallel_for(static_cast<std::size_t>(deg + 1), [&](std::size_t mm) {
        const int m = static_cast<int>(mm);
        out.c[m] = radial_solve(m, Fc[m], gc[m], h, m == 0 ? &out.defect : nullptr);
        if (m > 0) out.s[m] = radial_solve(m, Fs[m], gs[m], h, nullptr);
    });
    return out;
}

// Four-point Lagrange value and derivative from cell centres, mirrored by parity through r = 0.
void interpolate(const std::vector<double>& f, int m, double h, double r, double& v, double& dv)
{
    const int N = static_cast<int>(f.size());
    int j0 = static_cast<int>(std::floor(r / h - 0.5)) - 1;
    j0 = std::min(j0, N - 4);
    double x[4], y[4];
    for (int a = 0; a < 4; ++a) {
        const int j = j0 + a;
        x[a] = (j + 0.5) * h;
        y[a] = j >= 0 ? f[j] : (m % 2 == 0 ? 1.0 : -1.0) * f[-1 - j];
    }
    v = 0.0;
    dv = 0.0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0, den = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            l *= r - x[b];
            den *= x[a] - x[b];
        }
        double dl = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            double p = 1.0;
            for (int c = 0; c < 4; ++c) {
                if (c != a && c != b) p *= r - x[c];
            }
            dl += p;
        }
        v += y[a] * l / den;
        dv += y[a] * dl / den;
    }
}

struct PhiOnGrid {
    GridField value, d_r, d_theta;
    double defect = 0.0;
};

PhiOnGrid phi_on_grid(const SpectralField& omega, const GridPtr& grid, const PressureOptions& opt)
{
    if (omega.kind != FieldKind::vorticity) throw std::invalid_argument("pressure needs vorticity");
    const int K = omega.table->max_angular();
    if (grid->nt() < 3 * K + 1) throw std::invalid_argument("grid violates the anti-aliasing bound");
    if (opt.radial_cells < 8) throw std::invalid_argument("pressure needs at least 8 radial cells");
    const int angles = opt.angular_points > 0 ? opt.angular_points : std::max(grid->nt(), 4 * K + 2);
    if (angles < 4 * K + 1) throw std::invalid_argument("pressure angular sampling below 4K + 1");

    const PhiModes pm = solve_phi(omega, opt.radial_cells, angles);
    PhiOnGrid out{GridField::zeros(grid), GridField::zeros(grid), GridField::zeros(grid), pm.defect};
    const int M = grid->nt();
    parallel_for(static_cast<std::size_t>(grid->nr()), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const double r = grid->r(i);
        std::vector<double> vc(pm.degree + 1), vs(vc), dc(vc), ds(vc);
        for (int m = 0; m <= pm.degree; ++m) {
            interpolate(pm.c[m], m, pm.h, r, vc[m], dc[m]);
            interpolate(pm.s[m], m, pm.h, r, vs[m], ds[m]);
        }
        for (int q = 0; q < M; ++q) {
            const double th = grid->theta(q);
            double v = 0, dr = 0, dt = 0;
            for (int m = 0; m <= pm.degree; ++m) {
                const double cm = std::cos(m * th), sm = std::sin(m * th);
                v += vc[m] * cm + vs[m] * sm;
                dr += dc[m] * cm + ds[m] * sm;
                dt += m * (-vc[m] * sm + vs[m] * cm);
            }
            out.value.at(i, q) = v;
            out.d_r.at(i, q) = dr;
            out.d_theta.at(i, q) = dt;
        }
    });
    const double mean = integrate(out.value) / kPi;
    for (double& v : out.value.values) v -= mean;
    return out;
}

}  // namespace

GridField phi_of_u(const SpectralField& omega, const GridPtr& grid, const PressureOptions& opt)
{
    return phi_on_grid(omega, grid, opt).value;
}

PressureField recover_pressure(const SpectralField& omega, double nu, const GridPtr& grid,
                               const PressureOptions& opt)
{
    if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    PhiOnGrid phi = phi_on_grid(omega, grid, opt);

    // the constant part of the extension has a constant conjugate, absorbed by the mean
    HarmonicExpansion ext =
        q1_split(omega, HarmonicExpansion::zeros(omega.table->max_angular()), grid).extension;
    ext.c[0] = 0.0;
    HarmonicExpansion conj = harmonic_conjugate(ext);
    conj *= nu;

    PressureField p;
    p.grid = grid;
    p.phi = phi.value;
    p.values = phi.value;
    p.d_r = phi.d_r;
    p.d_theta = phi.d_theta;
    p.compatibility_defect = phi.defect;
    const GridField v = to_grid(conj, grid), dr = to_grid(conj, grid, Derivative::d_r),
                    dt = to_grid(conj, grid, Derivative::d_theta);
    for (std::size_t q = 0; q < v.values.size(); ++q) {
        p.values.values[q] += v.values[q];
        p.d_r.values[q] += dr.values[q];
        p.d_theta.values[q] += dt.values[q];
    }
    const double mean = integrate(p.values) / kPi;
    for (double& x : p.values.values) x -= mean;
    p.mean = integrate(p.values) / kPi;
    p.zero_mean = std::abs(p.mean) <= 1e-9;
    return p;
}

MomentumResidual momentum_residual(const Trajectory& trajectory, std::size_t index, const GridPtr& grid,
                                   double nu, const PressureOptions& opt)
{
    if (index == 0 || index + 1 >= trajectory.size()) {
        throw std::out_of_range("momentum residual needs samples on both sides of index " +
                                std::to_string(index));
    }
    const SpectralField& w = trajectory.states[index];
    const double span = trajectory.times[index + 1] - trajectory.times[index - 1];
    const SpectralField psi = biot_savart(w);
    const SpectralField psi_p = biot_savart(trajectory.states[index + 1]);
    const SpectralField psi_m = biot_savart(trajectory.states[index - 1]);

    const GridField pr = to_grid(psi, grid, Derivative::d_r), pt = to_grid(psi, grid, Derivative::d_theta),
                    prr = to_grid(psi, grid, Derivative::d_rr),
                    prt = to_grid(psi, grid, Derivative::d_rtheta),
                    ptt = to_grid(psi, grid, Derivative::d_thetatheta);
    const GridField wr = to_grid(w, grid, Derivative::d_r), wt = to_grid(w, grid, Derivative::d_theta);
    const GridField prp = to_grid(psi_p, grid, Derivative::d_r), ptp = to_grid(psi_p, grid, Derivative::d_theta);
    const GridField prm = to_grid(psi_m, grid, Derivative::d_r), ptm = to_grid(psi_m, grid, Derivative::d_theta);
    const PressureField p = recover_pressure(w, nu, grid, opt);

    double res2 = 0.0, grad2 = 0.0, ut2 = 0.0;
    for (int i = 0; i < grid->nr(); ++i) {
        const double r = grid->r(i);
        const double wgt = grid->area_weight(i);
        for (int q = 0; q < grid->nt(); ++q) {
            const double ur = -pt.at(i, q) / r, ut = pr.at(i, q);
            const double ur_t = -(ptp.at(i, q) - ptm.at(i, q)) / (r * span);
            const double ut_t = (prp.at(i, q) - prm.at(i, q)) / span;
            const double dur_dr = pt.at(i, q) / (r * r) - prt.at(i, q) / r, dur_dt = -ptt.at(i, q) / r;
            const double dut_dr = prr.at(i, q), dut_dt = prt.at(i, q);
            const double adv_r = ur * dur_dr + ut * dur_dt / r - ut * ut / r;
            const double adv_t = ur * dut_dr + ut * dut_dt / r + ur * ut / r;
            const double gp_r = p.d_r.at(i, q), gp_t = p.d_theta.at(i, q) / r;
            // the vector Laplacian of u is grad-perp omega
            const double Rr = ur_t + adv_r + nu * wt.at(i, q) / r + gp_r;
            const double Rt = ut_t + adv_t - nu * wr.at(i, q) + gp_t;
            res2 += wgt * (Rr * Rr + Rt * Rt);
            grad2 += wgt * (gp_r * gp_r + gp_t * gp_t);
            ut2 += wgt * (ur_t * ur_t + ut_t * ut_t);
        }
    }
    MomentumResidual out;
    out.absolute = std::sqrt(res2);
    out.scale = std::sqrt(grad2) + std::sqrt(ut2);
    out.relative = out.scale > 0.0 ? out.absolute / out.scale : 0.0;
    return out;
}

void write_pressure_csv(const PressureField& p, std::ostream& os)
{
    os << "r,theta,p\n";
    for (int i = 0; i < p.grid->nr(); ++i) {
        for (int q = 0; q < p.grid->nt(); ++q) {
            os << format_real(p.grid->r(i)) << ',' << format_real(p.grid->theta(q)) << ','
               << format_real(p.values.at(i, q)) << '\n';
        }
    }
}

}  // namespace vortspec
