#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <vector>

namespace vortspec {

// Annulus R_in < r < 1 with a tensor quadrature: Gauss-Legendre in r, uniform in theta.
struct AnnulusGeometry {
    double R_in = 0.5;
    int radial_points = 64;
    int angular_points = 32;
    int harmonic_degree = 8;  // zero-flux harmonics r^{+-k} cos/sin(k theta) up to this k

    // Throws std::invalid_argument listing every violated constraint.
    void validate() const;
};

class AnnulusGrid {
public:
    explicit AnnulusGrid(const AnnulusGeometry& geom);

    const AnnulusGeometry& geometry() const { return geom_; }
    double R() const { return geom_.R_in; }
    int nr() const { return static_cast<int>(r_.size()); }
    int nt() const { return geom_.angular_points; }
    std::size_t points() const { return static_cast<std::size_t>(nr()) * nt(); }
    double r(int i) const { return r_[i]; }
    double radial_weight(int i) const { return w_[i]; }  // includes the Jacobian r
    double theta(int m) const { return theta_[m]; }
    double area_weight(int i) const { return w_[i] * dtheta_; }

private:
    AnnulusGeometry geom_;
    std::vector<double> r_, w_, theta_;
    double dtheta_ = 0.0;
};

using AnnulusGridPtr = std::shared_ptr<const AnnulusGrid>;
AnnulusGridPtr make_annulus_grid(const AnnulusGeometry& geom);

struct AnnulusSamples {
    AnnulusGridPtr grid;
    std::vector<double> values;  // [i * M + m]

    static AnnulusSamples zeros(AnnulusGridPtr grid);
    double& at(int i, int m) { return values[static_cast<std::size_t>(i) * grid->nt() + m]; }
    double at(int i, int m) const { return values[static_cast<std::size_t>(i) * grid->nt() + m]; }
};

double annulus_inner(const AnnulusSamples& a, const AnnulusSamples& b);
double annulus_l2(const AnnulusSamples& a);

// Legendre polynomials in s = (2r - 1 - R)/(1 - R) times Fourier modes up to angular degree.
struct AnnulusExpansion {
    double R_in = 0.5;
    int degree = 0;   // polynomial degree
    int angular = 0;  // largest Fourier index
    std::vector<double> coeffs;  // [(2k + parity) * (degree + 1) + p], parity 0 cos, 1 sin

    static AnnulusExpansion zeros(double R_in, int degree, int angular);
    double& at(int k, int parity, int p) { return coeffs[index(k, parity, p)]; }
    double at(int k, int parity, int p) const { return coeffs[index(k, parity, p)]; }
    std::size_t index(int k, int parity, int p) const
    {
        return static_cast<std::size_t>(2 * k + parity) * (degree + 1) + p;
    }

    // Radial profile of one Fourier component and its first two derivatives.
    void radial(int k, int parity, double r, double& f, double& df, double& d2f) const;
    double value(double r, double theta) const;
    double d_r(double r, double theta) const;
    double d_theta(double r, double theta) const;
    AnnulusSamples sample(const AnnulusGridPtr& grid) const;
};

// Least-squares fit of a function into the expansion space, mode by mode.
AnnulusExpansion fit_expansion(const AnnulusGridPtr& grid, int degree, int angular,
                               const std::function<double(double, double)>& f);

// Closest element (L2) of the expansion space orthogonal to the zero-flux harmonics
// {1, r^k cos, r^k sin, r^-k cos, r^-k sin}.
AnnulusExpansion project_to_v0(const AnnulusExpansion& e, const AnnulusGridPtr& grid);

// Inner-circle flux of a radial derivative field, outward normal pointing into the hole:
// -integral over theta of d_r f(R, theta) R.
double inner_flux(double R, int angular_points, const std::function<double(double, double)>& d_r);

// xi = a ln r + b: harmonic, zero on the outer circle, flux -1 through the inner circle.
struct XiProfile {
    double a = 0.0;
    double b = 0.0;
    double value(double r) const;
    double d_r(double r) const;
    double d_rr(double r) const;
    double inner_value(double R) const { return value(R); }
};

XiProfile xi_circulation(const AnnulusGeometry& geom);
// Quadrature of the normal derivative of xi over the inner circle.
double xi_flux(const AnnulusGeometry& geom, const XiProfile& xi);

// L2 projector onto the zero-flux harmonic span, by least squares in a normalized basis.
class HarmonicProjector {
public:
    explicit HarmonicProjector(AnnulusGridPtr grid);

    int size() const { return static_cast<int>(labels_.size()); }
    double condition() const { return condition_; }
    // Coefficients of the projection on the normalized basis.
    std::vector<double> coefficients(const AnnulusSamples& f) const;
    AnnulusSamples harmonic_part(const AnnulusSamples& f) const;
    // f minus its harmonic part: the discrete P.
    AnnulusSamples project(const AnnulusSamples& f) const;
    // Largest |<f, b_j>| over the normalized basis.
    double max_pairing(const AnnulusSamples& f) const;

    // Basis element j: r^{sign k} trig(k theta) / norm.
    struct Label {
        int k;
        int sign;    // +1, -1; 0 for the constant
        int parity;  // 0 cos, 1 sin
        double norm;
    };
    const std::vector<Label>& labels() const { return labels_; }
    double basis_value(int j, double r, double theta) const;
    double basis_d_r(int j, double r, double theta) const;

private:
    AnnulusGridPtr grid_;
    std::vector<Label> labels_;
    std::vector<AnnulusSamples> basis_;
    std::vector<double> gram_inv_;  // dense inverse of the Gram matrix
    double condition_ = 0.0;
};

struct OmegaBig {
    XiProfile xi;
    std::vector<double> harmonic_coeffs;  // subtracted normalized zero-flux harmonics
    std::shared_ptr<const HarmonicProjector> projector;
    double condition = 0.0;
    double flux = 0.0;              // through the inner circle
    double max_orthogonality = 0.0;  // largest pairing with a zero-flux harmonic
    double distance_to_xi = 0.0;     // L2 norm of Omega - xi

    double value(double r, double theta) const;
    double d_r(double r, double theta) const;
};

// Omega = P xi. Throws std::runtime_error when the Gram condition estimate exceeds 1e12.
OmegaBig omega_big(const AnnulusGridPtr& grid);

// omega - Q1 omega: zero-flux harmonic with the traces of omega on both circles up to
// a constant on the inner circle. Q1 omega is zero outside, inner_constant inside.
struct AnnulusDirichletSplit {
    std::vector<double> a_c, b_c, a_s, b_s;  // H = a r^k + b r^-k per mode, k >= 1
    double h0 = 0.0;                           // constant mode of H
    double inner_constant = 0.0;
    double h_value(double r, double theta) const;
    double h_d_r(double r, double theta) const;
};

AnnulusDirichletSplit annulus_dirichlet_split(const AnnulusExpansion& omega);

struct ZetaPairing {
    double volume = 0.0;    // -integral grad xi . grad Q1 omega
    double boundary = 0.0;  // -inner-circle integral of (d xi/dn) Q1 omega
};

ZetaPairing zeta_pairing(const AnnulusGridPtr& grid, const XiProfile& xi, const AnnulusExpansion& omega);

struct BoundaryReport {
    double outer_max = 0.0;      // max |psi| on the outer circle
    double inner_stddev = 0.0;   // spread of psi on the inner circle
    double inner_mean = 0.0;
    double normal_max = 0.0;     // max |d psi / dn| on both circles, one-sided differences
    double orthogonality = 0.0;  // precondition measure
};

struct NewtonianOptions {
    int boundary_points = 48;
    int radial_points = 48;  // per side of the split
    double fd_step = 1e-4;
};

// Newtonian potential of omega at both circles and along the normals.
// Throws std::invalid_argument when omega pairs above 1e-8 with a zero-flux harmonic.
BoundaryReport newtonian_bs_annulus(const AnnulusExpansion& omega, const AnnulusGridPtr& grid,
                                    const NewtonianOptions& opt = {});
// Potential at one point (r, theta), r in [0, inf).
double annulus_newtonian_potential(const AnnulusExpansion& omega, double r, double theta, int radial_points);

enum class GalerkinSide {
    vorticity,  // -Laplacian on zero-flux-harmonic-orthogonal vorticities, form |grad Q1 w|^2 / |w|^2
    stream,     // clamped stream functions, form |Lap psi|^2 / |grad psi|^2
    relaxed     // same form on zero outer trace, constant inner trace, zero inner flux
};

// Dense per-mode operator: radial Legendre trial functions for Fourier index k.
struct GalerkinOperator {
    GalerkinSide side = GalerkinSide::stream;
    int k = 0;
    int n = 0;
    std::vector<double> stiffness;    // n x n, row major
    std::vector<double> mass;         // n x n
    std::vector<double> constraints;  // rows x n
    int rows = 0;
    double symmetry_error = 0.0;
    bool mass_positive = false;  // on the constrained subspace
};

GalerkinOperator assemble_galerkin(double R_in, GalerkinSide side, int k, int degree);
// Generalized eigenvalues on the constrained subspace, ascending.
std::vector<double> galerkin_eigenvalues(const GalerkinOperator& op);

struct AnnulusEigenvalue {
    double lambda = 0.0;
    int k = 0;
    int multiplicity = 1;
};

struct GalerkinOptions {
    int radial_degree = 24;
    int angular_max = 4;
    int keep = 6;  // eigenvalues kept per Fourier index
};

struct AnnulusSpectra {
    std::vector<AnnulusEigenvalue> spectrum_V, spectrum_S, spectrum_Z;
    double lambda_V = 0.0, lambda_S = 0.0, lambda_Z = 0.0;
    double max_symmetry_error = 0.0;
    bool masses_positive = true;
};

AnnulusSpectra galerkin_spectra(double R_in, const GalerkinOptions& opt = {});

struct CirculationOptions {
    double nu = 0.1;
    double gamma0 = 1.0;
    double T = 1.0;
    double output_dt = 5e-4;
    double t_start = 0.1;       // residual evaluated from here on (initial vortex sheet)
    double probe_radius = 0.0;  // 0: midpoint of the annulus
    int radial_degree = 40;
};

struct CirculationSeries {
    std::vector<double> times;
    std::vector<double> gamma_inner;  // velocity circulation on the inner circle
    std::vector<double> gamma_probe;  // on the probe circle
    std::vector<double> flux_inner;   // nu * circle integral of d_r omega, inner circle
    std::vector<double> flux_probe;
    double residual_inner = 0.0;  // max |gamma' - flux| / scale, inner circle
    double residual_probe = 0.0;
    double lamb_residual = 0.0;   // larger of the two
    double scale = 0.0;
};

// Stokes evolution of the radial stream function xi * gamma0 + psi_r in the clamped
// Galerkin space, exact in time through the generalized eigendecomposition.
// regular_vorticity: optional radial vorticity whose clamped stream function is added.
CirculationSeries annulus_stokes_circulation(double R_in, const CirculationOptions& opt,
                                             const std::function<double(double)>& regular_vorticity = nullptr);

void write_spectra_csv(const AnnulusSpectra& s, std::ostream& os);
void write_circulation_csv(const CirculationSeries& c, std::ostream& os);

}  // namespace vortspec
