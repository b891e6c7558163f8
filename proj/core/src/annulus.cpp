#include "vortspec/annulus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "vortspec/format.hpp"
#include "vortspec/parallel.hpp"
#include "vortspec/specfun.hpp"

namespace vortspec {

namespace {

constexpr double kPi = std::numbers::pi;

// Legendre values and three derivatives in s, indices 0..P.
struct Legendre {
    std::vector<double> v, d1, d2, d3;
};

Legendre legendre(int P, double s)
{
    Legendre L;
    L.v.assign(P + 1, 0.0);
    L.d1 = L.v;
    L.d2 = L.v;
    L.d3 = L.v;
    L.v[0] = 1.0;
    if (P >= 1) {
        L.v[1] = s;
        L.d1[1] = 1.0;
    }
    for (int n = 1; n < P; ++n) {
        L.v[n + 1] = ((2 * n + 1) * s * L.v[n] - n * L.v[n - 1]) / (n + 1);
        L.d1[n + 1] = L.d1[n - 1] + (2 * n + 1) * L.v[n];
        L.d2[n + 1] = L.d2[n - 1] + (2 * n + 1) * L.d1[n];
        L.d3[n + 1] = L.d3[n - 1] + (2 * n + 1) * L.d2[n];
    }
    return L;
}

double to_s(double R, double r) { return (2.0 * r - 1.0 - R) / (1.0 - R); }

// Basis functions of r with r-derivatives up to third order.
struct RadialBasis {
    std::vector<double> f, df, d2f, d3f;
};

RadialBasis radial_basis(double R, int P, double r)
{
    const Legendre L = legendre(P, to_s(R, r));
    const double g = 2.0 / (1.0 - R);
    RadialBasis b;
    b.f = L.v;
    b.df.resize(P + 1);
    b.d2f.resize(P + 1);
    b.d3f.resize(P + 1);
    for (int p = 0; p <= P; ++p) {
        b.df[p] = g * L.d1[p];
        b.d2f[p] = g * g * L.d2[p];
        b.d3f[p] = g * g * g * L.d3[p];
    }
    return b;
}

double trig(int parity, int k, double theta) { return parity == 0 ? std::cos(k * theta) : std::sin(k * theta); }
double dtrig(int parity, int k, double theta)
{
    return parity == 0 ? -k * std::sin(k * theta) : k * std::cos(k * theta);
}

// Angular Fourier coefficient of samples on one grid ring.
double ring_coefficient(const AnnulusSamples& f, int i, int k, int parity)
{
    const int M = f.grid->nt();
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += f.at(i, m) * trig(parity, k, f.grid->theta(m));
    return s * (k == 0 ? 1.0 : 2.0) / M;
}

// Zero-flux harmonic radial factors for mode k.
std::vector<double> harmonic_factors(int k, double r)
{
    if (k == 0) return {1.0};
    return {std::pow(r, k), std::pow(r, -k)};
}

}  // namespace

// ---------------------------------------------------------------- geometry

void AnnulusGeometry::validate() const
{
    std::vector<std::string> errs;
    if (!(R_in >= 0.05 && R_in <= 0.95)) errs.push_back("R_in must lie in [0.05, 0.95]");
    if (radial_points < 8) errs.push_back("radial_points must be at least 8");
    if (harmonic_degree < 0) errs.push_back("harmonic_degree must be nonnegative");
    if (angular_points < 2 * harmonic_degree + 2) {
        errs.push_back("angular_points must be at least 2 * harmonic_degree + 2");
    }
    if (!errs.empty()) {
        std::string msg = "invalid annulus geometry:";
        for (const auto& e : errs) msg += " " + e + ";";
        throw std::invalid_argument(msg);
    }
}

AnnulusGrid::AnnulusGrid(const AnnulusGeometry& geom) : geom_(geom)
{
    geom_.validate();
    const auto q = specfun::gauss_legendre(geom.radial_points, geom.R_in, 1.0);
    r_ = q.nodes;
    w_.resize(r_.size());
    for (std::size_t i = 0; i < r_.size(); ++i) w_[i] = q.weights[i] * r_[i];
    dtheta_ = 2 * kPi / geom.angular_points;
    theta_.resize(geom.angular_points);
    for (int m = 0; m < geom.angular_points; ++m) theta_[m] = m * dtheta_;
}

AnnulusGridPtr make_annulus_grid(const AnnulusGeometry& geom) { return std::make_shared<const AnnulusGrid>(geom); }

AnnulusSamples AnnulusSamples::zeros(AnnulusGridPtr grid)
{
    AnnulusSamples s;
    s.values.assign(grid->points(), 0.0);
    s.grid = std::move(grid);
    return s;
}

double annulus_inner(const AnnulusSamples& a, const AnnulusSamples& b)
{
    const AnnulusGrid& g = *a.grid;
    double s = 0.0;
    for (int i = 0; i < g.nr(); ++i) {
        double ring = 0.0;
        for (int m = 0; m < g.nt(); ++m) ring += a.at(i, m) * b.at(i, m);
        s += g.area_weight(i) * ring;
    }
    return s;
}

double annulus_l2(const AnnulusSamples& a) { return std::sqrt(std::max(0.0, annulus_inner(a, a))); }

// ---------------------------------------------------------------- expansions

AnnulusExpansion AnnulusExpansion::zeros(double R_in, int degree, int angular)
{
    if (degree < 0 || angular < 0) throw std::invalid_argument("expansion sizes must be nonnegative");
    AnnulusExpansion e;
    e.R_in = R_in;
    e.degree = degree;
    e.angular = angular;
    e.coeffs.assign(static_cast<std::size_t>(2 * (angular + 1)) * (degree + 1), 0.0);
    return e;
}

void AnnulusExpansion::radial(int k, int parity, double r, double& f, double& df, double& d2f) const
{
    const RadialBasis b = radial_basis(R_in, degree, r);
    f = df = d2f = 0.0;
    for (int p = 0; p <= degree; ++p) {
        const double c = at(k, parity, p);
        f += c * b.f[p];
        df += c * b.df[p];
        d2f += c * b.d2f[p];
    }
}

namespace {

enum class What { value, d_r, d_theta };

double expansion_eval(const AnnulusExpansion& e, double r, double theta, What what)
{
    const RadialBasis b = radial_basis(e.R_in, e.degree, r);
    double out = 0.0;
    for (int k = 0; k <= e.angular; ++k) {
        for (int parity = 0; parity < (k == 0 ? 1 : 2); ++parity) {
            double f = 0.0, df = 0.0;
            for (int p = 0; p <= e.degree; ++p) {
                const double c = e.at(k, parity, p);
                f += c * b.f[p];
                df += c * b.df[p];
            }
            switch (what) {
                case What::value: out += f * trig(parity, k, theta); break;
                case What::d_r: out += df * trig(parity, k, theta); break;
                case What::d_theta: out += f * dtrig(parity, k, theta); break;
            }
        }
    }
    return out;
}

}  // namespace

double AnnulusExpansion::value(double r, double theta) const { return expansion_eval(*this, r, theta, What::value); }
double AnnulusExpansion::d_r(double r, double theta) const { return expansion_eval(*this, r, theta, What::d_r); }
double AnnulusExpansion::d_theta(double r, double theta) const
{
    return expansion_eval(*this, r, theta, What::d_theta);
}

AnnulusSamples AnnulusExpansion::sample(const AnnulusGridPtr& grid) const
{
    AnnulusSamples s = AnnulusSamples::zeros(grid);
    parallel_for(static_cast<std::size_t>(grid->nr()), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const RadialBasis b = radial_basis(R_in, degree, grid->r(i));
        std::vector<double> prof(2 * (angular + 1), 0.0);
        for (int k = 0; k <= angular; ++k) {
            for (int parity = 0; parity < 2; ++parity) {
                for (int p = 0; p <= degree; ++p) prof[2 * k + parity] += at(k, parity, p) * b.f[p];
            }
        }
        for (int m = 0; m < grid->nt(); ++m) {
            double v = 0.0;
            for (int k = 0; k <= angular; ++k) {
                v += prof[2 * k] * std::cos(k * grid->theta(m));
                if (k > 0) v += prof[2 * k + 1] * std::sin(k * grid->theta(m));
            }
            s.at(i, m) = v;
        }
    });
    return s;
}

namespace {

// Radial Gram matrix of the Legendre basis with the area weight r dr.
Eigen::MatrixXd radial_gram(const AnnulusGrid& g, int P)
{
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(P + 1, P + 1);
    for (int i = 0; i < g.nr(); ++i) {
        const RadialBasis b = radial_basis(g.R(), P, g.r(i));
        for (int p = 0; p <= P; ++p) {
            for (int q = 0; q <= P; ++q) G(p, q) += g.radial_weight(i) * b.f[p] * b.f[q];
        }
    }
    return G;
}

}  // namespace

AnnulusExpansion fit_expansion(const AnnulusGridPtr& grid, int degree, int angular,
                               const std::function<double(double, double)>& f)
{
    if (2 * angular + 1 > grid->nt()) throw std::invalid_argument("angular degree exceeds the grid resolution");
    if (degree + 1 > grid->nr()) throw std::invalid_argument("polynomial degree exceeds the grid resolution");
    AnnulusSamples s = AnnulusSamples::zeros(grid);
    for (int i = 0; i < grid->nr(); ++i) {
        for (int m = 0; m < grid->nt(); ++m) s.at(i, m) = f(grid->r(i), grid->theta(m));
    }
    AnnulusExpansion e = AnnulusExpansion::zeros(grid->R(), degree, angular);
    const Eigen::LDLT<Eigen::MatrixXd> G(radial_gram(*grid, degree));
    for (int k = 0; k <= angular; ++k) {
        for (int parity = 0; parity < (k == 0 ? 1 : 2); ++parity) {
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(degree + 1);
            for (int i = 0; i < grid->nr(); ++i) {
                const RadialBasis b = radial_basis(grid->R(), degree, grid->r(i));
                const double fk = ring_coefficient(s, i, k, parity);
                for (int p = 0; p <= degree; ++p) rhs(p) += grid->radial_weight(i) * b.f[p] * fk;
            }
            const Eigen::VectorXd c = G.solve(rhs);
            for (int p = 0; p <= degree; ++p) e.at(k, parity, p) = c(p);
        }
    }
    return e;
}

AnnulusExpansion project_to_v0(const AnnulusExpansion& e, const AnnulusGridPtr& grid)
{
    if (std::abs(e.R_in - grid->R()) > 0.0) throw std::invalid_argument("expansion and grid radii differ");
    const int P = e.degree;
    const Eigen::MatrixXd G = radial_gram(*grid, P);
    const Eigen::LDLT<Eigen::MatrixXd> Gs(G);
    AnnulusExpansion out = e;
    for (int k = 0; k <= e.angular; ++k) {
        const int rows = k == 0 ? 1 : 2;
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rows, P + 1);
        for (int i = 0; i < grid->nr(); ++i) {
            const RadialBasis b = radial_basis(grid->R(), P, grid->r(i));
            const auto h = harmonic_factors(k, grid->r(i));
            for (int j = 0; j < rows; ++j) {
                for (int p = 0; p <= P; ++p) C(j, p) += grid->radial_weight(i) * h[j] * b.f[p];
            }
        }
        // minimize the L2 distance under C x = 0: x = c - G^-1 C^T (C G^-1 C^T)^-1 C c
        const Eigen::MatrixXd GiCt = Gs.solve(C.transpose());
        const Eigen::MatrixXd S = C * GiCt;
        for (int parity = 0; parity < (k == 0 ? 1 : 2); ++parity) {
            Eigen::VectorXd c(P + 1);
            for (int p = 0; p <= P; ++p) c(p) = e.at(k, parity, p);
            const Eigen::VectorXd x = c - GiCt * S.ldlt().solve(C * c);
            for (int p = 0; p <= P; ++p) out.at(k, parity, p) = x(p);
        }
    }
    return out;
}

double inner_flux(double R, int angular_points, const std::function<double(double, double)>& d_r)
{
    double s = 0.0;
    for (int m = 0; m < angular_points; ++m) s += d_r(R, 2 * kPi * m / angular_points);
    return -s * R * 2 * kPi / angular_points;
}

// ---------------------------------------------------------------- xi and Omega

double XiProfile::value(double r) const { return a * std::log(r) + b; }
double XiProfile::d_r(double r) const { return a / r; }
double XiProfile::d_rr(double r) const { return -a / (r * r); }

XiProfile xi_circulation(const AnnulusGeometry& geom)
{
    geom.validate();
    // the outward normal on the inner circle is -e_r, so the flux is -2 pi a
    return XiProfile{1.0 / (2 * kPi), 0.0};
}

double xi_flux(const AnnulusGeometry& geom, const XiProfile& xi)
{
    return inner_flux(geom.R_in, geom.angular_points, [&](double r, double) { return xi.d_r(r); });
}

HarmonicProjector::HarmonicProjector(AnnulusGridPtr grid) : grid_(std::move(grid))
{
    const int K = grid_->geometry().harmonic_degree;
    labels_.push_back({0, 0, 0, 1.0});
    for (int k = 1; k <= K; ++k) {
        for (int sign : {1, -1}) {
            for (int parity : {0, 1}) labels_.push_back({k, sign, parity, 1.0});
        }
    }
    for (auto& l : labels_) {
        AnnulusSamples s = AnnulusSamples::zeros(grid_);
        for (int i = 0; i < grid_->nr(); ++i) {
            const double rad = l.sign == 0 ? 1.0 : std::pow(grid_->r(i), l.sign * l.k);
            for (int m = 0; m < grid_->nt(); ++m) s.at(i, m) = rad * trig(l.parity, l.k, grid_->theta(m));
        }
        l.norm = annulus_l2(s);
        for (double& v : s.values) v /= l.norm;
        basis_.push_back(std::move(s));
    }
    const int n = size();
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) G(i, j) = G(j, i) = annulus_inner(basis_[i], basis_[j]);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd Gi = G.inverse();
    gram_inv_.assign(Gi.data(), Gi.data() + n * n);
}

std::vector<double> HarmonicProjector::coefficients(const AnnulusSamples& f) const
{
    const int n = size();
    std::vector<double> b(n), c(n, 0.0);
    for (int j = 0; j < n; ++j) b[j] = annulus_inner(basis_[j], f);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) c[i] += gram_inv_[static_cast<std::size_t>(j) * n + i] * b[j];
    }
    return c;
}

AnnulusSamples HarmonicProjector::harmonic_part(const AnnulusSamples& f) const
{
    const auto c = coefficients(f);
    AnnulusSamples h = AnnulusSamples::zeros(grid_);
    for (int j = 0; j < size(); ++j) {
        for (std::size_t q = 0; q < h.values.size(); ++q) h.values[q] += c[j] * basis_[j].values[q];
    }
    return h;
}

AnnulusSamples HarmonicProjector::project(const AnnulusSamples& f) const
{
    AnnulusSamples out = f;
    const AnnulusSamples h = harmonic_part(f);
    for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] -= h.values[q];
    return out;
}

double HarmonicProjector::max_pairing(const AnnulusSamples& f) const
{
    double worst = 0.0;
    for (const auto& b : basis_) worst = std::max(worst, std::abs(annulus_inner(b, f)));
    return worst;
}

double HarmonicProjector::basis_value(int j, double r, double theta) const
{
    const Label& l = labels_[j];
    const double rad = l.sign == 0 ? 1.0 : std::pow(r, l.sign * l.k);
    return rad * trig(l.parity, l.k, theta) / l.norm;
}

double HarmonicProjector::basis_d_r(int j, double r, double theta) const
{
    const Label& l = labels_[j];
    if (l.sign == 0) return 0.0;
    const double e = l.sign * l.k;
    return e * std::pow(r, e - 1) * trig(l.parity, l.k, theta) / l.norm;
}

double OmegaBig::value(double r, double theta) const
{
    double v = xi.value(r);
    for (std::size_t j = 0; j < harmonic_coeffs.size(); ++j) {
        v -= harmonic_coeffs[j] * projector->basis_value(static_cast<int>(j), r, theta);
    }
    return v;
}

double OmegaBig::d_r(double r, double theta) const
{
    double v = xi.d_r(r);
    for (std::size_t j = 0; j < harmonic_coeffs.size(); ++j) {
        v -= harmonic_coeffs[j] * projector->basis_d_r(static_cast<int>(j), r, theta);
    }
    return v;
}

OmegaBig omega_big(const AnnulusGridPtr& grid)
{
    OmegaBig o;
    o.xi = xi_circulation(grid->geometry());
    auto proj = std::make_shared<const HarmonicProjector>(grid);
    o.condition = proj->condition();
    if (!(o.condition <= 1e12)) {
        throw std::runtime_error("zero-flux harmonic basis is ill-conditioned (estimate " +
                                 format_real(o.condition) + ")");
    }
    AnnulusSamples xs = AnnulusSamples::zeros(grid);
    for (int i = 0; i < grid->nr(); ++i) {
        for (int m = 0; m < grid->nt(); ++m) xs.at(i, m) = o.xi.value(grid->r(i));
    }
    o.harmonic_coeffs = proj->coefficients(xs);
    o.projector = proj;
    o.distance_to_xi = annulus_l2(proj->harmonic_part(xs));
    o.max_orthogonality = proj->max_pairing(proj->project(xs));
    o.flux = inner_flux(grid->R(), grid->nt(), [&](double r, double th) { return o.d_r(r, th); });
    return o;
}

// ---------------------------------------------------------------- Dirichlet split and zeta

double AnnulusDirichletSplit::h_value(double r, double theta) const
{
    double v = h0;
    for (std::size_t k = 1; k < a_c.size(); ++k) {
        const double rp = std::pow(r, static_cast<double>(k)), rm = 1.0 / rp;
        v += (a_c[k] * rp + b_c[k] * rm) * std::cos(k * theta) + (a_s[k] * rp + b_s[k] * rm) * std::sin(k * theta);
    }
    return v;
}

double AnnulusDirichletSplit::h_d_r(double r, double theta) const
{
    double v = 0.0;
    for (std::size_t k = 1; k < a_c.size(); ++k) {
        const double kk = static_cast<double>(k);
        const double dp = kk * std::pow(r, kk - 1), dm = -kk * std::pow(r, -kk - 1);
        v += (a_c[k] * dp + b_c[k] * dm) * std::cos(k * theta) + (a_s[k] * dp + b_s[k] * dm) * std::sin(k * theta);
    }
    return v;
}

AnnulusDirichletSplit annulus_dirichlet_split(const AnnulusExpansion& omega)
{
    const double R = omega.R_in;
    const int K = omega.angular;
    AnnulusDirichletSplit s;
    s.a_c.assign(K + 1, 0.0);
    s.b_c = s.a_s = s.b_s = s.a_c;
    auto trace = [&](int k, int parity, double r) {
        double f, df, d2f;
        omega.radial(k, parity, r, f, df, d2f);
        return f;
    };
    // zero-flux harmonics in the mean mode are constants, so the inner trace keeps a constant offset
    s.h0 = trace(0, 0, 1.0);
    s.inner_constant = trace(0, 0, R) - s.h0;
    for (int k = 1; k <= K; ++k) {
        const double Rp = std::pow(R, k), Rm = 1.0 / Rp, det = Rm - Rp;
        for (int parity = 0; parity < 2; ++parity) {
            const double fo = trace(k, parity, 1.0), fi = trace(k, parity, R);
            // a + b = fo, a R^k + b R^-k = fi
            const double b = (fi - fo * Rp) / det;
            const double a = fo - b;
            (parity == 0 ? s.a_c : s.a_s)[k] = a;
            (parity == 0 ? s.b_c : s.b_s)[k] = b;
        }
    }
    return s;
}

ZetaPairing zeta_pairing(const AnnulusGridPtr& grid, const XiProfile& xi, const AnnulusExpansion& omega)
{
    const AnnulusDirichletSplit sp = annulus_dirichlet_split(omega);
    ZetaPairing z;
    // xi is radial, so grad xi . grad Q1 omega = xi' * d_r Q1 omega
    for (int i = 0; i < grid->nr(); ++i) {
        const double r = grid->r(i);
        double ring = 0.0;
        for (int m = 0; m < grid->nt(); ++m) {
            const double th = grid->theta(m);
            ring += omega.d_r(r, th) - sp.h_d_r(r, th);
        }
        z.volume -= grid->area_weight(i) * xi.d_r(r) * ring;
    }
    const double R = grid->R();
    double ring = 0.0;
    for (int m = 0; m < grid->nt(); ++m) {
        const double th = grid->theta(m);
        ring += omega.value(R, th) - sp.h_value(R, th);
    }
    // d xi / dn = -xi'(R) on the inner circle
    z.boundary = xi.d_r(R) * R * ring * 2 * kPi / grid->nt();
    return z;
}

// ---------------------------------------------------------------- Newtonian potential

double annulus_newtonian_potential(const AnnulusExpansion& omega, double rho, double phi, int radial_points)
{
    const double R = omega.R_in;
    const int K = omega.angular;
    std::vector<double> cs(K + 1), sn(K + 1);
    for (int k = 0; k <= K; ++k) {
        cs[k] = std::cos(k * phi);
        sn[k] = std::sin(k * phi);
    }
    auto piece = [&](double a, double b) {
        if (!(b > a)) return 0.0;
        const auto q = specfun::gauss_legendre(radial_points, a, b);
        double s = 0.0;
        for (int i = 0; i < q.order; ++i) {
            const double r = q.nodes[i];
            const double lo = std::min(r, rho), hi = std::max(r, rho);
            const RadialBasis bas = radial_basis(R, omega.degree, r);
            double acc = 0.0;
            double ratio = 1.0;
            for (int k = 0; k <= K; ++k) {
                double fc = 0.0, fs = 0.0;
                for (int p = 0; p <= omega.degree; ++p) {
                    fc += omega.at(k, 0, p) * bas.f[p];
                    if (k > 0) fs += omega.at(k, 1, p) * bas.f[p];
                }
                if (k == 0) {
                    acc += fc * std::log(hi);
                } else {
                    ratio *= lo / hi;
                    acc -= ratio / (2.0 * k) * (fc * cs[k] + fs * sn[k]);
                }
            }
            s += q.weights[i] * r * acc;
        }
        return s;
    };
    if (rho <= R || rho >= 1.0) return piece(R, 1.0);
    return piece(R, rho) + piece(rho, 1.0);
}

BoundaryReport newtonian_bs_annulus(const AnnulusExpansion& omega, const AnnulusGridPtr& grid,
                                    const NewtonianOptions& opt)
{
    if (omega.angular > grid->geometry().harmonic_degree) {
        throw std::invalid_argument("omega has Fourier modes beyond the harmonic basis");
    }
    const HarmonicProjector proj(grid);
    const AnnulusSamples s = omega.sample(grid);
    BoundaryReport rep;
    rep.orthogonality = proj.max_pairing(s);
    if (rep.orthogonality > 1e-8 * std::max(1.0, annulus_l2(s))) {
        throw std::invalid_argument("omega is not orthogonal to the zero-flux harmonics (pairing " +
                                    format_real(rep.orthogonality) + ")");
    }
    const double R = omega.R_in, h = opt.fd_step;
    const int B = opt.boundary_points;
    std::vector<double> outer(B), inner(B), dn_out(B), dn_in(B);
    parallel_for(static_cast<std::size_t>(B), [&](std::size_t bb) {
        const double th = 2 * kPi * static_cast<double>(bb) / B;
        auto pot = [&](double r) { return annulus_newtonian_potential(omega, r, th, opt.radial_points); };
        const double o0 = pot(1.0), o1 = pot(1.0 - h), o2 = pot(1.0 - 2 * h);
        const double i0 = pot(R), i1 = pot(R + h), i2 = pot(R + 2 * h);
        outer[bb] = o0;
        inner[bb] = i0;
        dn_out[bb] = (3 * o0 - 4 * o1 + o2) / (2 * h);
        dn_in[bb] = -(-3 * i0 + 4 * i1 - i2) / (2 * h);
    });
    double mean = 0.0;
    for (int b = 0; b < B; ++b) {
        rep.outer_max = std::max(rep.outer_max, std::abs(outer[b]));
        rep.normal_max = std::max({rep.normal_max, std::abs(dn_out[b]), std::abs(dn_in[b])});
        mean += inner[b] / B;
    }
    double var = 0.0;
    for (int b = 0; b < B; ++b) var += (inner[b] - mean) * (inner[b] - mean) / B;
    rep.inner_mean = mean;
    rep.inner_stddev = std::sqrt(var);
    return rep;
}

// ---------------------------------------------------------------- Galerkin operators

namespace {

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
as_matrix(const std::vector<double>& v, int rows, int cols)
{
    return {v.data(), rows, cols};
}

// Orthonormal basis of the null space of the constraint rows.
Eigen::MatrixXd null_space(const GalerkinOperator& op)
{
    if (op.rows == 0) return Eigen::MatrixXd::Identity(op.n, op.n);
    const Eigen::MatrixXd C = as_matrix(op.constraints, op.rows, op.n);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-12 * sv(0)) ++rank;
    }
    return svd.matrixV().rightCols(op.n - rank);
}

}  // namespace

GalerkinOperator assemble_galerkin(double R_in, GalerkinSide side, int k, int degree)
{
    if (!(R_in >= 0.05 && R_in <= 0.95)) throw std::invalid_argument("R_in must lie in [0.05, 0.95]");
    if (degree < 5) throw std::invalid_argument("Galerkin radial degree must be at least 5");
    if (k < 0) throw std::invalid_argument("Fourier index must be nonnegative");
    const int n = degree + 1;
    const double R = R_in, kk = static_cast<double>(k) * k;
    GalerkinOperator op;
    op.side = side;
    op.k = k;
    op.n = n;
    op.stiffness.assign(static_cast<std::size_t>(n) * n, 0.0);
    op.mass = op.stiffness;

    const auto q = specfun::gauss_legendre(2 * degree + 40, R, 1.0);
    const RadialBasis at1 = radial_basis(R, degree, 1.0), atR = radial_basis(R, degree, R);

    // harmonic lift for the vorticity side: H_p = a_p r^k + b_p r^-k, or the constant phi_p(1)
    std::vector<double> ha(n, 0.0), hb(n, 0.0);
    if (side == GalerkinSide::vorticity) {
        for (int p = 0; p < n; ++p) {
            if (k == 0) {
                ha[p] = at1.f[p];
            } else {
                const double Rp = std::pow(R, k), Rm = 1.0 / Rp;
                hb[p] = (atR.f[p] - at1.f[p] * Rp) / (Rm - Rp);
                ha[p] = at1.f[p] - hb[p];
            }
        }
    }

    std::vector<double> g(n), dg(n), lap(n);
    for (int i = 0; i < q.order; ++i) {
        const double r = q.nodes[i], w = q.weights[i] * r;
        const RadialBasis b = radial_basis(R, degree, r);
        if (side == GalerkinSide::vorticity) {
            for (int p = 0; p < n; ++p) {
                double H = ha[p], dH = 0.0;
                if (k > 0) {
                    H = ha[p] * std::pow(r, k) + hb[p] * std::pow(r, -k);
                    dH = k * (ha[p] * std::pow(r, k - 1) - hb[p] * std::pow(r, -k - 1));
                }
                g[p] = b.f[p] - H;
                dg[p] = b.df[p] - dH;
            }
            for (int p = 0; p < n; ++p) {
                for (int s = 0; s < n; ++s) {
                    op.stiffness[p * n + s] += w * (dg[p] * dg[s] + kk * g[p] * g[s] / (r * r));
                    op.mass[p * n + s] += w * b.f[p] * b.f[s];
                }
            }
        } else {
            for (int p = 0; p < n; ++p) lap[p] = b.d2f[p] + b.df[p] / r - kk * b.f[p] / (r * r);
            for (int p = 0; p < n; ++p) {
                for (int s = 0; s < n; ++s) {
                    op.stiffness[p * n + s] += w * lap[p] * lap[s];
                    op.mass[p * n + s] += w * (b.df[p] * b.df[s] + kk * b.f[p] * b.f[s] / (r * r));
                }
            }
        }
    }

    std::vector<std::vector<double>> rows;
    auto add_row = [&](std::vector<double> row) {
        double nrm = 0.0;
        for (double v : row) nrm += v * v;
        nrm = std::sqrt(nrm);
        for (double& v : row) v /= nrm;
        rows.push_back(std::move(row));
    };
    if (side == GalerkinSide::vorticity) {
        const int m = k == 0 ? 1 : 2;
        std::vector<std::vector<double>> c(m, std::vector<double>(n, 0.0));
        for (int i = 0; i < q.order; ++i) {
            const double r = q.nodes[i], w = q.weights[i] * r;
            const RadialBasis b = radial_basis(R, degree, r);
            const auto h = harmonic_factors(k, r);
            for (int j = 0; j < m; ++j) {
                for (int p = 0; p < n; ++p) c[j][p] += w * h[j] * b.f[p];
            }
        }
        for (auto& row : c) add_row(std::move(row));
    } else {
        add_row(at1.f);  // zero outer trace
        if (k > 0) add_row(atR.f);
        if (side == GalerkinSide::stream) {
            add_row(at1.df);
            add_row(atR.df);
        } else if (k == 0) {
            add_row(atR.df);  // zero inner flux
        }
    }
    op.rows = static_cast<int>(rows.size());
    for (const auto& row : rows) op.constraints.insert(op.constraints.end(), row.begin(), row.end());

    double asym = 0.0, scale = 0.0;
    for (int p = 0; p < n; ++p) {
        for (int s = 0; s < n; ++s) {
            asym = std::max({asym, std::abs(op.stiffness[p * n + s] - op.stiffness[s * n + p]),
                             std::abs(op.mass[p * n + s] - op.mass[s * n + p])});
            scale = std::max({scale, std::abs(op.stiffness[p * n + s]), std::abs(op.mass[p * n + s])});
        }
    }
    op.symmetry_error = scale > 0.0 ? asym / scale : 0.0;
    const Eigen::MatrixXd Z = null_space(op);
    const Eigen::MatrixXd Mr = Z.transpose() * as_matrix(op.mass, n, n) * Z;
    op.mass_positive = Eigen::LLT<Eigen::MatrixXd>(0.5 * (Mr + Mr.transpose())).info() == Eigen::Success;
    return op;
}

std::vector<double> galerkin_eigenvalues(const GalerkinOperator& op)
{
    const Eigen::MatrixXd Z = null_space(op);
    Eigen::MatrixXd A = Z.transpose() * as_matrix(op.stiffness, op.n, op.n) * Z;
    Eigen::MatrixXd M = Z.transpose() * as_matrix(op.mass, op.n, op.n) * Z;
    A = 0.5 * (A + A.transpose());
    M = 0.5 * (M + M.transpose());
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end());
    return out;
}

AnnulusSpectra galerkin_spectra(double R_in, const GalerkinOptions& opt)
{
    if (opt.radial_degree < 5 || opt.angular_max < 3) {
        throw std::invalid_argument("Galerkin trial space needs radial degree >= 5 and angular_max >= 3");
    }
    AnnulusSpectra out;
    const GalerkinSide sides[3] = {GalerkinSide::vorticity, GalerkinSide::stream, GalerkinSide::relaxed};
    std::vector<AnnulusEigenvalue>* lists[3] = {&out.spectrum_V, &out.spectrum_S, &out.spectrum_Z};
    const int K = opt.angular_max;
    std::vector<std::vector<std::vector<double>>> eig(3, std::vector<std::vector<double>>(K + 1));
    std::vector<double> sym(3 * (K + 1), 0.0);
    std::vector<int> pos(3 * (K + 1), 1);
    parallel_for(static_cast<std::size_t>(3 * (K + 1)), [&](std::size_t job) {
        const int s = static_cast<int>(job) / (K + 1), k = static_cast<int>(job) % (K + 1);
        const GalerkinOperator op = assemble_galerkin(R_in, sides[s], k, opt.radial_degree);
        eig[s][k] = galerkin_eigenvalues(op);
        sym[job] = op.symmetry_error;
        pos[job] = op.mass_positive ? 1 : 0;
    });
    for (std::size_t j = 0; j < sym.size(); ++j) {
        out.max_symmetry_error = std::max(out.max_symmetry_error, sym[j]);
        out.masses_positive = out.masses_positive && pos[j] == 1;
    }
    for (int s = 0; s < 3; ++s) {
        for (int k = 0; k <= K; ++k) {
            const int keep = std::min<int>(opt.keep, static_cast<int>(eig[s][k].size()));
            for (int i = 0; i < keep; ++i) lists[s]->push_back({eig[s][k][i], k, k == 0 ? 1 : 2});
        }
        std::sort(lists[s]->begin(), lists[s]->end(),
                  [](const AnnulusEigenvalue& a, const AnnulusEigenvalue& b) {
                      return a.lambda < b.lambda || (a.lambda == b.lambda && a.k < b.k);
                  });
    }
    out.lambda_V = out.spectrum_V.front().lambda;
    out.lambda_S = out.spectrum_S.front().lambda;
    out.lambda_Z = out.spectrum_Z.front().lambda;
    return out;
}

// ---------------------------------------------------------------- circulation

CirculationSeries annulus_stokes_circulation(double R_in, const CirculationOptions& opt,
                                             const std::function<double(double)>& regular_vorticity)
{
    if (!(opt.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    if (!(opt.output_dt > 0.0) || !(opt.T >= 2 * opt.output_dt)) {
        throw std::invalid_argument("need at least three output times");
    }
    const double R = R_in;
    const double rho = opt.probe_radius > 0.0 ? opt.probe_radius : 0.5 * (1.0 + R);
    if (!(rho > R && rho < 1.0)) throw std::invalid_argument("probe radius must lie inside the annulus");
    const int P = opt.radial_degree;
    const GalerkinOperator op = assemble_galerkin(R, GalerkinSide::stream, 0, P);
    const int n = op.n;
    const Eigen::MatrixXd Z = null_space(op);
    const Eigen::MatrixXd A0 = as_matrix(op.stiffness, n, n), M0 = as_matrix(op.mass, n, n);
    Eigen::MatrixXd A = Z.transpose() * A0 * Z, M = Z.transpose() * M0 * Z;
    A = 0.5 * (A + A.transpose());
    M = 0.5 * (M + M.transpose());
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");

    // initial data: energy projection of gamma0 xi, plus the clamped stream function of the regular part
    const XiProfile xi{1.0 / (2 * kPi), 0.0};
    const auto q = specfun::gauss_legendre(2 * P + 40, R, 1.0);
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(n), bw = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < q.order; ++i) {
        const double r = q.nodes[i], w = q.weights[i] * r;
        const RadialBasis b = radial_basis(R, P, r);
        const double w0 = regular_vorticity ? regular_vorticity(r) : 0.0;
        for (int p = 0; p < n; ++p) {
            bx(p) += w * b.df[p] * opt.gamma0 * xi.d_r(r);
            bw(p) += w * (b.d2f[p] + b.df[p] / r) * w0;
        }
    }
    Eigen::VectorXd y0 = M.ldlt().solve(Z.transpose() * bx);
    if (regular_vorticity) y0 += A.ldlt().solve(Z.transpose() * bw);
    const Eigen::MatrixXd& V = es.eigenvectors();  // M-orthonormal
    const Eigen::VectorXd modal = V.transpose() * (M * y0);

    const RadialBasis bR = radial_basis(R, P, R), bP = radial_basis(R, P, rho);
    CirculationSeries out;
    const int steps = static_cast<int>(std::lround(opt.T / opt.output_dt));
    for (int j = 0; j <= steps; ++j) {
        const double t = j * opt.output_dt;
        Eigen::VectorXd m = modal;
        for (int i = 0; i < m.size(); ++i) m(i) *= std::exp(-opt.nu * es.eigenvalues()(i) * t);
        const Eigen::VectorXd x = Z * (V * m);
        auto circ = [&](const RadialBasis& b, double r) {
            double d1 = 0.0;
            for (int p = 0; p < n; ++p) d1 += x(p) * b.df[p];
            return 2 * kPi * r * d1;
        };
        // omega' = psi''' + psi''/r - psi'/r^2 for a radial stream function
        auto flux = [&](const RadialBasis& b, double r) {
            double d1 = 0.0, d2 = 0.0, d3 = 0.0;
            for (int p = 0; p < n; ++p) {
                d1 += x(p) * b.df[p];
                d2 += x(p) * b.d2f[p];
                d3 += x(p) * b.d3f[p];
            }
            return opt.nu * 2 * kPi * r * (d3 + d2 / r - d1 / (r * r));
        };
        out.times.push_back(t);
        out.gamma_inner.push_back(circ(bR, R));
        out.gamma_probe.push_back(circ(bP, rho));
        out.flux_inner.push_back(flux(bR, R));
        out.flux_probe.push_back(flux(bP, rho));
    }
    out.scale = std::abs(opt.gamma0);
    for (std::size_t j = 0; j < out.times.size(); ++j) {
        out.scale = std::max({out.scale, std::abs(out.gamma_inner[j]), std::abs(out.gamma_probe[j])});
    }
    if (out.scale == 0.0) out.scale = 1.0;
    for (std::size_t j = 1; j + 1 < out.times.size(); ++j) {
        if (out.times[j] < opt.t_start - 1e-12) continue;
        const double span = out.times[j + 1] - out.times[j - 1];
        const double gi = (out.gamma_inner[j + 1] - out.gamma_inner[j - 1]) / span;
        const double gp = (out.gamma_probe[j + 1] - out.gamma_probe[j - 1]) / span;
        out.residual_inner = std::max(out.residual_inner, std::abs(gi - out.flux_inner[j]) / out.scale);
        out.residual_probe = std::max(out.residual_probe, std::abs(gp - out.flux_probe[j]) / out.scale);
    }
    out.lamb_residual = std::max(out.residual_inner, out.residual_probe);
    return out;
}

void write_spectra_csv(const AnnulusSpectra& s, std::ostream& os)
{
    os << "side,index,k,multiplicity,lambda\n";
    auto dump = [&](const char* side, const std::vector<AnnulusEigenvalue>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            os << side << ',' << i << ',' << v[i].k << ',' << v[i].multiplicity << ','
               << format_real(v[i].lambda) << '\n';
        }
    };
    dump("V", s.spectrum_V);
    dump("S", s.spectrum_S);
    dump("Z", s.spectrum_Z);
}

void write_circulation_csv(const CirculationSeries& c, std::ostream& os)
{
    os << "t,gamma_inner,gamma_probe,flux_inner,flux_probe\n";
    for (std::size_t j = 0; j < c.times.size(); ++j) {
        os << format_real(c.times[j]) << ',' << format_real(c.gamma_inner[j]) << ','
           << format_real(c.gamma_probe[j]) << ',' << format_real(c.flux_inner[j]) << ','
           << format_real(c.flux_probe[j]) << '\n';
    }
}

}  // namespace vortspec
