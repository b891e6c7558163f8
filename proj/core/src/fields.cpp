#include "vortspec/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "vortspec/format.hpp"
#include "vortspec/parallel.hpp"

namespace vortspec {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_table(const SpectralField& a, const SpectralField& b)
{
    if (a.table != b.table) throw std::invalid_argument("fields live on different tables");
    if (a.kind != b.kind) throw std::invalid_argument("fields have different kinds");
}

struct Jet {
    double f = 0.0, df = 0.0, d2f = 0.0;
};

// Radial profile of mode n and its first two r-derivatives.
Jet profile_jet(const EigenTable& t, std::size_t n, double r, FieldKind kind)
{
    const int k = t.modes()[n].k;
    const double a = t.sqrt_eigenvalue(n);
    const double c = t.norm_constant(n);
    const double x = a * r;
    Jet out;
    const double jk = specfun::bessel_j(k, x);
    double jp, jpp;
    if (x > 0.0) {
        jp = k * jk / x - specfun::bessel_j(k + 1, x);
        jpp = -jp / x - (1.0 - static_cast<double>(k * k) / (x * x)) * jk;
    } else {
        jp = k == 1 ? 0.5 : 0.0;
        jpp = k == 0 ? -0.5 : (k == 2 ? 0.25 : 0.0);
    }
    out.f = c * jk;
    out.df = c * a * jp;
    out.d2f = c * a * a * jpp;
    if (kind == FieldKind::stream) {
        const double b = c * t.boundary_bessel(n);
        out.f -= b * std::pow(r, k);
        if (k >= 1) out.df -= b * k * std::pow(r, k - 1);
        if (k >= 2) out.d2f -= b * k * (k - 1) * std::pow(r, k - 2);
    }
    return out;
}

double trig(int k, Parity p, double theta)
{
    return p == Parity::cosine ? std::cos(k * theta) : std::sin(k * theta);
}

double dtrig(int k, Parity p, double theta)
{
    return p == Parity::cosine ? -k * std::sin(k * theta) : k * std::cos(k * theta);
}

double d2trig(int k, Parity p, double theta) { return -static_cast<double>(k * k) * trig(k, p, theta); }

}  // namespace

// ---------------------------------------------------------------- SpectralField

SpectralField SpectralField::zeros(TablePtr table, FieldKind kind)
{
    SpectralField f;
    f.coeffs.assign(table->size(), 0.0);
    f.table = std::move(table);
    f.kind = kind;
    return f;
}

SpectralField SpectralField::single(TablePtr table, const ModeIndex& mode, double value,
                                    FieldKind kind)
{
    SpectralField f = zeros(std::move(table), kind);
    f.at(mode) = value;
    return f;
}

SpectralField& SpectralField::operator+=(const SpectralField& o)
{
    require_same_table(*this, o);
    for (std::size_t n = 0; n < coeffs.size(); ++n) coeffs[n] += o.coeffs[n];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o)
{
    require_same_table(*this, o);
    for (std::size_t n = 0; n < coeffs.size(); ++n) coeffs[n] -= o.coeffs[n];
    return *this;
}

SpectralField& SpectralField::operator*=(double s)
{
    for (double& v : coeffs) v *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

// ------------------------------------------------------------ HarmonicExpansion

double harmonic_normalizer(int m)
{
    return m == 0 ? 1.0 / std::sqrt(kPi) : std::sqrt((2.0 * m + 2.0) / kPi);
}

HarmonicExpansion HarmonicExpansion::zeros(int degree)
{
    HarmonicExpansion h;
    h.degree = degree;
    h.c.assign(degree + 1, 0.0);
    h.s.assign(degree + 1, 0.0);
    return h;
}

double HarmonicExpansion::l2_norm() const
{
    double s2 = 0.0;
    for (int m = 0; m <= degree; ++m) s2 += c[m] * c[m] + s[m] * s[m];
    return std::sqrt(s2);
}

double HarmonicExpansion::max_abs() const
{
    double v = 0.0;
    for (int m = 0; m <= degree; ++m) v = std::max({v, std::abs(c[m]), std::abs(s[m])});
    return v;
}

double HarmonicExpansion::value(double r, double theta) const
{
    double v = 0.0;
    for (int m = 0; m <= degree; ++m) {
        v += harmonic_normalizer(m) * std::pow(r, m) *
             (c[m] * std::cos(m * theta) + s[m] * std::sin(m * theta));
    }
    return v;
}

double HarmonicExpansion::d_r(double r, double theta) const
{
    double v = 0.0;
    for (int m = 1; m <= degree; ++m) {
        v += harmonic_normalizer(m) * m * std::pow(r, m - 1) *
             (c[m] * std::cos(m * theta) + s[m] * std::sin(m * theta));
    }
    return v;
}

double HarmonicExpansion::d_theta(double r, double theta) const
{
    double v = 0.0;
    for (int m = 1; m <= degree; ++m) {
        v += harmonic_normalizer(m) * m * std::pow(r, m) *
             (-c[m] * std::sin(m * theta) + s[m] * std::cos(m * theta));
    }
    return v;
}

HarmonicExpansion& HarmonicExpansion::operator+=(const HarmonicExpansion& o)
{
    if (o.degree != degree) throw std::invalid_argument("harmonic degree mismatch");
    for (int m = 0; m <= degree; ++m) {
        c[m] += o.c[m];
        s[m] += o.s[m];
    }
    return *this;
}

HarmonicExpansion& HarmonicExpansion::operator-=(const HarmonicExpansion& o)
{
    if (o.degree != degree) throw std::invalid_argument("harmonic degree mismatch");
    for (int m = 0; m <= degree; ++m) {
        c[m] -= o.c[m];
        s[m] -= o.s[m];
    }
    return *this;
}

HarmonicExpansion& HarmonicExpansion::operator*=(double f)
{
    for (int m = 0; m <= degree; ++m) {
        c[m] *= f;
        s[m] *= f;
    }
    return *this;
}

// --------------------------------------------------------------------- grids

RadialProfiles make_profiles(const EigenTable& table, const std::vector<double>& radii)
{
    RadialProfiles p;
    p.radii = radii;
    const std::size_t N = table.size();
    const std::size_t R = radii.size();
    for (auto* v : {&p.rho, &p.drho, &p.d2rho, &p.sig, &p.dsig, &p.d2sig}) {
        v->assign(N, std::vector<double>(R, 0.0));
    }
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t i = 0; i < R; ++i) {
            const Jet v = profile_jet(table, n, radii[i], FieldKind::vorticity);
            p.rho[n][i] = v.f;
            p.drho[n][i] = v.df;
            p.d2rho[n][i] = v.d2f;
            const Jet s = profile_jet(table, n, radii[i], FieldKind::stream);
            p.sig[n][i] = s.f;
            p.dsig[n][i] = s.df;
            p.d2sig[n][i] = s.d2f;
        }
    }
    return p;
}

PolarGrid::PolarGrid(TablePtr table, int radial_points, int angular_points)
    : table_(std::move(table)), M_(angular_points)
{
    const int K = table_->max_angular();
    const int J = table_->max_radial();
    if (angular_points < std::max(2 * K + 2, 3 * K + 1)) {
        throw std::invalid_argument("angular points must be at least max(2K+2, 3K+1)");
    }
    if (radial_points < 2 * J + K + 8) {
        throw std::invalid_argument("radial points must be at least 2J+K+8");
    }
    radial_ = specfun::gauss_legendre(radial_points, 0.0, 1.0);
    trig_max_ = K;
    theta_.resize(M_);
    for (int m = 0; m < M_; ++m) theta_[m] = 2.0 * kPi * m / M_;
    area_.resize(radial_points);
    for (int i = 0; i < radial_points; ++i) {
        area_[i] = radial_.weights[i] * radial_.nodes[i] * 2.0 * kPi / M_;
    }
    cos_.resize(static_cast<std::size_t>(trig_max_ + 1) * M_);
    sin_.resize(cos_.size());
    for (int k = 0; k <= trig_max_; ++k) {
        for (int m = 0; m < M_; ++m) {
            cos_[static_cast<std::size_t>(k) * M_ + m] = std::cos(k * theta_[m]);
            sin_[static_cast<std::size_t>(k) * M_ + m] = std::sin(k * theta_[m]);
        }
    }
    prof_ = make_profiles(*table_, radial_.nodes);

    // Orthonormality of the harmonic basis under this rule.
    double worst = 0.0;
    for (int a = 0; a <= K; ++a) {
        for (int b = 0; b <= K; ++b) {
            for (int pa = 0; pa < 2; ++pa) {
                for (int pb = 0; pb < 2; ++pb) {
                    if ((a == 0 && pa == 1) || (b == 0 && pb == 1)) continue;
                    double s = 0.0;
                    for (int i = 0; i < radial_points; ++i) {
                        const double r = radial_.nodes[i];
                        double ang = 0.0;
                        for (int m = 0; m < M_; ++m) {
                            const double ta = pa == 0 ? cos_kt(a, m) : sin_kt(a, m);
                            const double tb = pb == 0 ? cos_kt(b, m) : sin_kt(b, m);
                            ang += ta * tb;
                        }
                        s += area_[i] * std::pow(r, a + b) * ang;
                    }
                    s *= harmonic_normalizer(a) * harmonic_normalizer(b);
                    const double expect = (a == b && pa == pb) ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(s - expect));
                }
            }
        }
    }
    gram_error_ = worst;
    if (worst > 1e-10) throw std::runtime_error("harmonic basis not orthonormal on this grid");
}

GridPtr make_grid(TablePtr table, int radial_points, int angular_points)
{
    return std::make_shared<const PolarGrid>(std::move(table), radial_points, angular_points);
}

GridField GridField::zeros(GridPtr grid)
{
    GridField g;
    g.values.assign(grid->points(), 0.0);
    g.grid = std::move(grid);
    return g;
}

GridField sample(GridPtr grid, const std::function<double(double, double)>& f)
{
    GridField g = GridField::zeros(grid);
    for (int i = 0; i < grid->nr(); ++i) {
        for (int m = 0; m < grid->nt(); ++m) g.at(i, m) = f(grid->r(i), grid->theta(m));
    }
    return g;
}

double integrate(const GridField& f)
{
    const PolarGrid& g = *f.grid;
    double s = 0.0;
    for (int i = 0; i < g.nr(); ++i) {
        double row = 0.0;
        for (int m = 0; m < g.nt(); ++m) row += f.at(i, m);
        s += g.area_weight(i) * row;
    }
    return s;
}

double inner(const GridField& a, const GridField& b)
{
    if (a.grid != b.grid) throw std::invalid_argument("grid fields on different grids");
    const PolarGrid& g = *a.grid;
    double s = 0.0;
    for (int i = 0; i < g.nr(); ++i) {
        double row = 0.0;
        for (int m = 0; m < g.nt(); ++m) row += a.at(i, m) * b.at(i, m);
        s += g.area_weight(i) * row;
    }
    return s;
}

double l2_norm(const GridField& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

// --------------------------------------------------------------------- norms

double norm_at(const SpectralField& field, int index)
{
    if (index < -4 || index > 4) throw std::invalid_argument("norm index outside [-4, 4]");
    const int p = field.kind == FieldKind::stream ? index + 1 : index;
    double s = 0.0;
    for (std::size_t n = 0; n < field.size(); ++n) {
        s += std::pow(field.table->eigenvalue(n), p) * field[n] * field[n];
    }
    return std::sqrt(s);
}

SpectralField biot_savart(const SpectralField& omega)
{
    if (omega.kind != FieldKind::vorticity) throw std::invalid_argument("biot_savart needs vorticity");
    SpectralField psi = SpectralField::zeros(omega.table, FieldKind::stream);
    for (std::size_t n = 0; n < omega.size(); ++n) psi[n] = -omega[n] / omega.table->eigenvalue(n);
    return psi;
}

SpectralField laplacian(const SpectralField& psi)
{
    if (psi.kind != FieldKind::stream) throw std::invalid_argument("laplacian needs a stream field");
    SpectralField omega = SpectralField::zeros(psi.table, FieldKind::vorticity);
    for (std::size_t n = 0; n < psi.size(); ++n) omega[n] = -psi.table->eigenvalue(n) * psi[n];
    return omega;
}

SpectralField dirichlet_projection(const SpectralField& omega)
{
    if (omega.kind != FieldKind::vorticity) throw std::invalid_argument("Q1 needs vorticity");
    SpectralField q = omega;
    q.kind = FieldKind::stream;
    return q;
}

// ---------------------------------------------------------------- transforms

GridField to_grid(const SpectralField& field, const GridPtr& grid, Derivative what)
{
    if (field.table != grid->table_ptr()) throw std::invalid_argument("grid built for another table");
    const EigenTable& t = *field.table;
    const int K = t.max_angular();
    const int nr = grid->nr();
    const int M = grid->nt();
    const RadialProfiles& p = grid->profiles();
    const bool stream = field.kind == FieldKind::stream;

    int rad_order = 0;
    int ang_order = 0;
    switch (what) {
        case Derivative::value: break;
        case Derivative::d_r: rad_order = 1; break;
        case Derivative::d_theta: ang_order = 1; break;
        case Derivative::d_rr: rad_order = 2; break;
        case Derivative::d_rtheta: rad_order = 1; ang_order = 1; break;
        case Derivative::d_thetatheta: ang_order = 2; break;
    }
    const auto& prof = stream ? (rad_order == 0 ? p.sig : rad_order == 1 ? p.dsig : p.d2sig)
                              : (rad_order == 0 ? p.rho : rad_order == 1 ? p.drho : p.d2rho);

    // Radial combinations per angular wavenumber.
    std::vector<double> A(static_cast<std::size_t>(K + 1) * nr, 0.0);
    std::vector<double> B(A.size(), 0.0);
    for (std::size_t n = 0; n < t.size(); ++n) {
        const double cn = field[n];
        if (cn == 0.0) continue;
        const ModeIndex& mode = t.modes()[n];
        double* dst = (mode.parity == Parity::cosine ? A.data() : B.data()) +
                      static_cast<std::size_t>(mode.k) * nr;
        const auto& pr = prof[n];
        for (int i = 0; i < nr; ++i) dst[i] += cn * pr[i];
    }

    GridField out = GridField::zeros(grid);
    for (int k = 0; k <= K; ++k) {
        const double* a = A.data() + static_cast<std::size_t>(k) * nr;
        const double* b = B.data() + static_cast<std::size_t>(k) * nr;
        for (int m = 0; m < M; ++m) {
            double cf, sf;  // derivative of (a cos + b sin) in theta, applied ang_order times
            const double ck = grid->cos_kt(k, m), sk = grid->sin_kt(k, m);
            if (ang_order == 0) {
                cf = ck;
                sf = sk;
            } else if (ang_order == 1) {
                cf = -k * sk;
                sf = k * ck;
            } else {
                cf = -static_cast<double>(k * k) * ck;
                sf = -static_cast<double>(k * k) * sk;
            }
            for (int i = 0; i < nr; ++i) out.at(i, m) += a[i] * cf + b[i] * sf;
        }
    }
    return out;
}

GridField to_grid(const HarmonicExpansion& h, const GridPtr& grid, Derivative what)
{
    GridField out = GridField::zeros(grid);
    for (int i = 0; i < grid->nr(); ++i) {
        const double r = grid->r(i);
        for (int m = 0; m < grid->nt(); ++m) {
            const double th = grid->theta(m);
            double v = 0.0;
            for (int k = 0; k <= h.degree; ++k) {
                const double nk = harmonic_normalizer(k);
                const double ck = std::cos(k * th), sk = std::sin(k * th);
                const double rk = std::pow(r, k);
                const double rk1 = k >= 1 ? k * std::pow(r, k - 1) : 0.0;
                const double rk2 = k >= 2 ? k * (k - 1) * std::pow(r, k - 2) : 0.0;
                switch (what) {
                    case Derivative::value: v += nk * rk * (h.c[k] * ck + h.s[k] * sk); break;
                    case Derivative::d_r: v += nk * rk1 * (h.c[k] * ck + h.s[k] * sk); break;
                    case Derivative::d_rr: v += nk * rk2 * (h.c[k] * ck + h.s[k] * sk); break;
                    case Derivative::d_theta: v += nk * rk * k * (-h.c[k] * sk + h.s[k] * ck); break;
                    case Derivative::d_rtheta: v += nk * rk1 * k * (-h.c[k] * sk + h.s[k] * ck); break;
                    case Derivative::d_thetatheta:
                        v -= nk * rk * k * k * (h.c[k] * ck + h.s[k] * sk);
                        break;
                }
            }
            out.at(i, m) = v;
        }
    }
    return out;
}

double evaluate(const SpectralField& field, double r, double theta, Derivative what)
{
    const EigenTable& t = *field.table;
    double v = 0.0;
    for (std::size_t n = 0; n < t.size(); ++n) {
        if (field[n] == 0.0) continue;
        const ModeIndex& mode = t.modes()[n];
        const Jet j = profile_jet(t, n, r, field.kind);
        double term = 0.0;
        switch (what) {
            case Derivative::value: term = j.f * trig(mode.k, mode.parity, theta); break;
            case Derivative::d_r: term = j.df * trig(mode.k, mode.parity, theta); break;
            case Derivative::d_rr: term = j.d2f * trig(mode.k, mode.parity, theta); break;
            case Derivative::d_theta: term = j.f * dtrig(mode.k, mode.parity, theta); break;
            case Derivative::d_rtheta: term = j.df * dtrig(mode.k, mode.parity, theta); break;
            case Derivative::d_thetatheta: term = j.f * d2trig(mode.k, mode.parity, theta); break;
        }
        v += field[n] * term;
    }
    return v;
}

Decomposition from_grid(const GridField& values, const TablePtr& table)
{
    const GridPtr& grid = values.grid;
    if (grid->table_ptr() != table) throw std::invalid_argument("grid built for another table");
    const EigenTable& t = *table;
    const int K = t.max_angular();
    const int nr = grid->nr();
    const int M = grid->nt();
    const double dth = 2.0 * kPi / M;

    // Angular analysis, weighted by the polar radial measure w_i r_i.
    std::vector<double> Fc(static_cast<std::size_t>(K + 1) * nr, 0.0);
    std::vector<double> Fs(Fc.size(), 0.0);
    for (int i = 0; i < nr; ++i) {
        const double wr = grid->radial().weights[i] * grid->r(i) * dth;
        for (int k = 0; k <= K; ++k) {
            double sc = 0.0, ss = 0.0;
            for (int m = 0; m < M; ++m) {
                const double f = values.at(i, m);
                sc += f * grid->cos_kt(k, m);
                ss += f * grid->sin_kt(k, m);
            }
            Fc[static_cast<std::size_t>(k) * nr + i] = wr * sc;
            Fs[static_cast<std::size_t>(k) * nr + i] = wr * ss;
        }
    }

    Decomposition d;
    d.projected = SpectralField::zeros(table, FieldKind::vorticity);
    const RadialProfiles& p = grid->profiles();
    for (std::size_t n = 0; n < t.size(); ++n) {
        const ModeIndex& mode = t.modes()[n];
        const double* F = (mode.parity == Parity::cosine ? Fc.data() : Fs.data()) +
                          static_cast<std::size_t>(mode.k) * nr;
        double s = 0.0;
        for (int i = 0; i < nr; ++i) s += F[i] * p.rho[n][i];
        d.projected[n] = s;
    }

    const int Mh = grid->harmonic_degree();
    d.harmonic = HarmonicExpansion::zeros(Mh);
    for (int k = 0; k <= Mh; ++k) {
        double sc = 0.0, ss = 0.0;
        for (int i = 0; i < nr; ++i) {
            const double rk = std::pow(grid->r(i), k);
            sc += Fc[static_cast<std::size_t>(k) * nr + i] * rk;
            ss += Fs[static_cast<std::size_t>(k) * nr + i] * rk;
        }
        d.harmonic.c[k] = harmonic_normalizer(k) * sc;
        d.harmonic.s[k] = k == 0 ? 0.0 : harmonic_normalizer(k) * ss;
    }

    GridField rest = values;
    const GridField a = to_grid(d.projected, grid);
    const GridField b = to_grid(d.harmonic, grid);
    for (std::size_t q = 0; q < rest.values.size(); ++q) rest.values[q] -= a.values[q] + b.values[q];
    d.residual = l2_norm(rest);
    return d;
}

// ------------------------------------------------------------------------ Q1

std::pair<std::vector<double>, std::vector<double>>
boundary_trace(const SpectralField& omega, const HarmonicExpansion& tail)
{
    const EigenTable& t = *omega.table;
    const int deg = std::max(t.max_angular(), tail.degree);
    std::vector<double> tc(deg + 1, 0.0), ts(deg + 1, 0.0);
    for (std::size_t n = 0; n < t.size(); ++n) {
        const ModeIndex& mode = t.modes()[n];
        double b = omega[n] * t.norm_constant(n);
        b *= omega.kind == FieldKind::vorticity ? t.boundary_bessel(n) : 0.0;
        (mode.parity == Parity::cosine ? tc : ts)[mode.k] += b;
    }
    for (int m = 0; m <= tail.degree; ++m) {
        tc[m] += harmonic_normalizer(m) * tail.c[m];
        ts[m] += harmonic_normalizer(m) * tail.s[m];
    }
    return {tc, ts};
}

Q1Split q1_split(const SpectralField& omega, const HarmonicExpansion& tail, const GridPtr& grid)
{
    const auto [tc, ts] = boundary_trace(omega, tail);
    const int deg = static_cast<int>(tc.size()) - 1;
    Q1Split out;
    out.extension = HarmonicExpansion::zeros(deg);
    for (int m = 0; m <= deg; ++m) {
        out.extension.c[m] = tc[m] / harmonic_normalizer(m);
        out.extension.s[m] = m == 0 ? 0.0 : ts[m] / harmonic_normalizer(m);
    }
    out.dirichlet_part = to_grid(omega, grid);
    const GridField h = to_grid(tail, grid);
    const GridField e = to_grid(out.extension, grid);
    for (std::size_t q = 0; q < h.values.size(); ++q) {
        out.dirichlet_part.values[q] += h.values[q] - e.values[q];
    }
    return out;
}

// ------------------------------------------------------------- potentials

namespace {

// Naive tensor rule; flags points within half a radial cell of a node.
template <class Kernel>
PotentialResult naive_potential(const GridField& omega, const std::vector<Point>& points,
                                Kernel kernel)
{
    const PolarGrid& g = *omega.grid;
    const int nr = g.nr();
    const int M = g.nt();
    std::vector<double> yx(g.points()), yy(g.points()), q(g.points());
    for (int i = 0; i < nr; ++i) {
        for (int m = 0; m < M; ++m) {
            const std::size_t idx = static_cast<std::size_t>(i) * M + m;
            yx[idx] = g.r(i) * std::cos(g.theta(m));
            yy[idx] = g.r(i) * std::sin(g.theta(m));
            q[idx] = g.area_weight(i) * omega.at(i, m);
        }
    }
    std::vector<double> half_cell(nr);
    for (int i = 0; i < nr; ++i) {
        const double lo = i == 0 ? 0.0 : g.r(i - 1);
        const double hi = i + 1 == nr ? 1.0 : g.r(i + 1);
        half_cell[i] = 0.25 * (hi - lo);
    }

    PotentialResult res;
    res.values.assign(points.size(), 0.0);
    std::vector<char> flag(points.size(), 0);
    parallel_for(points.size(), [&](std::size_t p) {
        const double x = points[p][0], y = points[p][1];
        double s = 0.0;
        bool near = false;
        for (int i = 0; i < nr; ++i) {
            double row = 0.0;
            for (int m = 0; m < M; ++m) {
                const std::size_t idx = static_cast<std::size_t>(i) * M + m;
                const double dx = x - yx[idx], dy = y - yy[idx];
                const double d2 = dx * dx + dy * dy;
                if (d2 < half_cell[i] * half_cell[i]) near = true;
                row += q[idx] * kernel(x, y, yx[idx], yy[idx], d2);
            }
            s += row;
        }
        res.values[p] = s / (2.0 * kPi);
        flag[p] = near ? 1 : 0;
    });
    res.near_node.resize(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        res.near_node[p] = flag[p] != 0;
        res.warning = res.warning || res.near_node[p];
    }
    return res;
}

// Barycentric weights of Gauss-Legendre nodes, up to a common factor.
std::vector<double> barycentric_weights(const specfun::QuadratureRule& q)
{
    std::vector<double> w(q.order);
    const double half = 0.5 * (q.b - q.a);
    for (int i = 0; i < q.order; ++i) {
        const double t = (q.nodes[i] - 0.5 * (q.a + q.b)) / half;
        w[i] = ((i % 2 == 0) ? 1.0 : -1.0) * std::sqrt((1.0 - t * t) * q.weights[i] / half);
    }
    return w;
}

// Row of the interpolation matrix from the rule's nodes to x.
void interpolation_row(const specfun::QuadratureRule& q, const std::vector<double>& bw, double x,
                       double* row)
{
    for (int i = 0; i < q.order; ++i) {
        if (x == q.nodes[i]) {
            std::fill(row, row + q.order, 0.0);
            row[i] = 1.0;
            return;
        }
    }
    double den = 0.0;
    for (int i = 0; i < q.order; ++i) {
        row[i] = bw[i] / (x - q.nodes[i]);
        den += row[i];
    }
    for (int i = 0; i < q.order; ++i) row[i] /= den;
}

// Log kernel expanded in angular Fourier modes; the radial integral is split at
// the evaluation radius and done on interpolated profiles (product integration).
PotentialResult fourier_potential(const GridField& omega, const std::vector<Point>& points,
                                  bool with_image)
{
    const PolarGrid& g = *omega.grid;
    const int nr = g.nr();
    const int M = g.nt();
    const int mmax = (M - 1) / 2;
    const auto& rule = g.radial();

    // Angular Fourier coefficients of omega at each radial node.
    std::vector<double> ac(static_cast<std::size_t>(mmax + 1) * nr, 0.0);
    std::vector<double> as(ac.size(), 0.0);
    for (int i = 0; i < nr; ++i) {
        for (int k = 0; k <= mmax; ++k) {
            double sc = 0.0, ss = 0.0;
            for (int m = 0; m < M; ++m) {
                const double th = 2.0 * kPi * static_cast<double>((static_cast<long>(k) * m) % M) / M;
                sc += omega.at(i, m) * std::cos(th);
                ss += omega.at(i, m) * std::sin(th);
            }
            const double f = k == 0 ? 1.0 / M : 2.0 / M;
            ac[static_cast<std::size_t>(k) * nr + i] = f * sc;
            as[static_cast<std::size_t>(k) * nr + i] = f * ss;
        }
    }
    const std::vector<double> bw = barycentric_weights(rule);
    const auto unit = specfun::gauss_legendre(nr, 0.0, 1.0);

    PotentialResult res;
    res.values.assign(points.size(), 0.0);
    res.near_node.assign(points.size(), false);
    parallel_for(points.size(), [&](std::size_t p) {
        const double x = points[p][0], y = points[p][1];
        const double r = std::hypot(x, y);
        const double phi = std::atan2(y, x);
        // Sub-rule nodes and weights (with the polar Jacobian rho) plus interpolation rows.
        std::vector<double> rho, wt;
        if (r >= 1.0 || r <= 0.0) {
            rho = rule.nodes;
            wt = rule.weights;
        } else {
            for (int i = 0; i < nr; ++i) {
                rho.push_back(r * unit.nodes[i]);
                wt.push_back(r * unit.weights[i]);
            }
            for (int i = 0; i < nr; ++i) {
                rho.push_back(r + (1.0 - r) * unit.nodes[i]);
                wt.push_back((1.0 - r) * unit.weights[i]);
            }
        }
        const std::size_t ns = rho.size();
        std::vector<double> interp(ns * nr);
        for (std::size_t s = 0; s < ns; ++s) interpolation_row(rule, bw, rho[s], &interp[s * nr]);

        double total = 0.0;
        std::vector<double> fc(ns), fs(ns);
        for (int k = 0; k <= mmax; ++k) {
            const double* a = &ac[static_cast<std::size_t>(k) * nr];
            const double* b = &as[static_cast<std::size_t>(k) * nr];
            double sc = 0.0, ss = 0.0;
            for (std::size_t s = 0; s < ns; ++s) {
                double va = 0.0, vb = 0.0;
                const double* row = &interp[s * nr];
                for (int i = 0; i < nr; ++i) {
                    va += row[i] * a[i];
                    vb += row[i] * b[i];
                }
                const double rs = rho[s];
                const double lo = std::min(r, rs), hi = std::max(r, rs);
                double kern;
                if (k == 0) {
                    kern = std::log(hi);
                } else {
                    kern = -std::pow(lo / hi, k) / (2.0 * k);
                    if (with_image) kern += std::pow(r * rs, k) / (2.0 * k);
                }
                const double w = wt[s] * rs * kern;
                sc += w * va;
                ss += w * vb;
            }
            total += k == 0 ? sc : sc * std::cos(k * phi) + ss * std::sin(k * phi);
        }
        res.values[p] = total;
    });
    return res;
}

}  // namespace

PotentialResult newtonian_potential(const GridField& omega, const std::vector<Point>& points,
                                    PotentialMethod method)
{
    if (method == PotentialMethod::naive) {
        return naive_potential(omega, points, [](double, double, double, double, double d2) {
            return 0.5 * std::log(d2);
        });
    }
    return fourier_potential(omega, points, false);
}

PotentialResult dirichlet_green_potential(const GridField& omega, const std::vector<Point>& points,
                                          PotentialMethod method)
{
    for (const Point& p : points) {
        if (p[0] * p[0] + p[1] * p[1] >= 1.0) {
            throw std::invalid_argument("Dirichlet Green potential needs interior points");
        }
    }
    if (method == PotentialMethod::naive) {
        return naive_potential(omega, points, [](double x, double y, double a, double b, double d2) {
            // ln | |y| x - y / |y| | is the image-point term
            const double ny = std::sqrt(a * a + b * b);
            const double ix = ny * x - a / ny, iy = ny * y - b / ny;
            return 0.5 * std::log(d2) - 0.5 * std::log(ix * ix + iy * iy);
        });
    }
    return fourier_potential(omega, points, true);
}

// ------------------------------------------------------------------ misc

SpectralField random_field(const TablePtr& table, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectralField f = SpectralField::zeros(table);
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = normal(gen) / table->eigenvalue(n);
    const double nrm = norm_at(f, 0);
    return (1.0 / nrm) * f;
}

void write_grid_csv(const GridField& f, std::ostream& os)
{
    os << "r,theta,value\n";
    for (int i = 0; i < f.grid->nr(); ++i) {
        for (int m = 0; m < f.grid->nt(); ++m) {
            os << format_real(f.grid->r(i)) << ',' << format_real(f.grid->theta(m)) << ','
               << format_real(f.at(i, m)) << '\n';
        }
    }
}

std::string spectral_to_json(const SpectralField& f)
{
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t n = 0; n < f.size(); ++n) {
        const ModeIndex& m = f.table->modes()[n];
        j.push_back({{"k", m.k},
                     {"j", m.j},
                     {"parity", m.parity == Parity::cosine ? "cos" : "sin"},
                     {"coeff", f[n]}});
    }
    nlohmann::json out;
    out["kind"] = f.kind == FieldKind::vorticity ? "vorticity" : "stream";
    out["modes"] = std::move(j);
    return out.dump(2);
}

}  // namespace vortspec
