#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "vortspec/disk_spectrum.hpp"

namespace vortspec {

// vorticity: coefficients on the eigenfunctions e_n.
// stream: coefficients on phi_n = e_n - (harmonic extension of the trace of e_n),
// the clamped functions with Laplacian -lambda_n e_n.
enum class FieldKind { vorticity, stream };

struct SpectralField {
    TablePtr table;
    std::vector<double> coeffs;
    FieldKind kind = FieldKind::vorticity;

    static SpectralField zeros(TablePtr table, FieldKind kind = FieldKind::vorticity);
    static SpectralField single(TablePtr table, const ModeIndex& mode, double value = 1.0,
                                FieldKind kind = FieldKind::vorticity);

    std::size_t size() const { return coeffs.size(); }
    double& operator[](std::size_t n) { return coeffs[n]; }
    double operator[](std::size_t n) const { return coeffs[n]; }
    double& at(const ModeIndex& m) { return coeffs[table->index_of(m)]; }
    double at(const ModeIndex& m) const { return coeffs[table->index_of(m)]; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Coefficients on h_0 = 1/sqrt(pi), h_m^c = sqrt((2m+2)/pi) r^m cos(m theta), h_m^s likewise.
struct HarmonicExpansion {
    int degree = 0;
    std::vector<double> c;  // c[0] multiplies h_0
    std::vector<double> s;  // s[0] is always 0

    static HarmonicExpansion zeros(int degree);
    double l2_norm() const;
    double max_abs() const;
    double value(double r, double theta) const;
    double d_r(double r, double theta) const;
    double d_theta(double r, double theta) const;

    HarmonicExpansion& operator+=(const HarmonicExpansion& o);
    HarmonicExpansion& operator-=(const HarmonicExpansion& o);
    HarmonicExpansion& operator*=(double s);
};

double harmonic_normalizer(int m);

enum class Derivative { value, d_r, d_theta, d_rr, d_rtheta, d_thetatheta };

// Radial profiles of every table mode at a set of radii.
struct RadialProfiles {
    std::vector<double> radii;
    // [mode][radius]; rho = c J_k(alpha r), sig = c (J_k(alpha r) - J_k(alpha) r^k)
    std::vector<std::vector<double>> rho, drho, d2rho;
    std::vector<std::vector<double>> sig, dsig, d2sig;
};

RadialProfiles make_profiles(const EigenTable& table, const std::vector<double>& radii);

class PolarGrid {
public:
    PolarGrid(TablePtr table, int radial_points, int angular_points);

    const EigenTable& table() const { return *table_; }
    const TablePtr& table_ptr() const { return table_; }
    int nr() const { return radial_.order; }
    int nt() const { return M_; }
    std::size_t points() const { return static_cast<std::size_t>(nr()) * M_; }
    const specfun::QuadratureRule& radial() const { return radial_; }
    double r(int i) const { return radial_.nodes[i]; }
    double theta(int m) const { return theta_[m]; }
    // Polar area weight of node (i, m): w_i r_i 2 pi / M.
    double area_weight(int i) const { return area_[i]; }
    const RadialProfiles& profiles() const { return prof_; }
    int harmonic_degree() const { return table_->max_angular(); }
    int trig_degree() const { return trig_max_; }
    double cos_kt(int k, int m) const { return cos_[static_cast<std::size_t>(k) * M_ + m]; }
    double sin_kt(int k, int m) const { return sin_[static_cast<std::size_t>(k) * M_ + m]; }
    double harmonic_gram_error() const { return gram_error_; }

private:
    TablePtr table_;
    specfun::QuadratureRule radial_;
    int M_ = 0;
    int trig_max_ = 0;
    std::vector<double> theta_, area_, cos_, sin_;
    RadialProfiles prof_;
    double gram_error_ = 0.0;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

GridPtr make_grid(TablePtr table, int radial_points, int angular_points);

struct GridField {
    GridPtr grid;
    std::vector<double> values;  // [i * M + m]

    static GridField zeros(GridPtr grid);
    double& at(int i, int m) { return values[static_cast<std::size_t>(i) * grid->nt() + m]; }
    double at(int i, int m) const { return values[static_cast<std::size_t>(i) * grid->nt() + m]; }
};

GridField sample(GridPtr grid, const std::function<double(double, double)>& f);
double integrate(const GridField& f);
double inner(const GridField& a, const GridField& b);
double l2_norm(const GridField& f);

// sqrt(sum lambda^index c^2) for vorticity, sqrt(sum lambda^(index+1) c^2) for stream.
double norm_at(const SpectralField& field, int index);

SpectralField biot_savart(const SpectralField& omega);
SpectralField laplacian(const SpectralField& psi);
// Q1 omega = sum omega_n phi_n, returned on the clamped basis (kind stream).
SpectralField dirichlet_projection(const SpectralField& omega);

GridField to_grid(const SpectralField& field, const GridPtr& grid,
                  Derivative what = Derivative::value);
GridField to_grid(const HarmonicExpansion& h, const GridPtr& grid,
                  Derivative what = Derivative::value);

double evaluate(const SpectralField& field, double r, double theta,
                Derivative what = Derivative::value);

struct Decomposition {
    SpectralField projected;     // P f on the eigenbasis
    HarmonicExpansion harmonic;  // P-perp f on the harmonic basis
    double residual = 0.0;       // L2 norm of the unrepresented remainder
};

Decomposition from_grid(const GridField& values, const TablePtr& table);

// Boundary trace Fourier coefficients (cos, sin) of omega + tail, degree K.
std::pair<std::vector<double>, std::vector<double>>
boundary_trace(const SpectralField& omega, const HarmonicExpansion& tail);

struct Q1Split {
    GridField dirichlet_part;
    HarmonicExpansion extension;
};

Q1Split q1_split(const SpectralField& omega, const HarmonicExpansion& tail, const GridPtr& grid);

using Point = std::array<double, 2>;

struct PotentialResult {
    std::vector<double> values;
    std::vector<bool> near_node;  // naive rule only
    bool warning = false;
};

// product: angular Fourier expansion of the kernel, radial integral split at |x|.
// naive: plain tensor rule, which flags points within half a radial cell of a node.
enum class PotentialMethod { product, naive };

// (1/2 pi) ln|x - y| convolved with the sampled omega.
PotentialResult newtonian_potential(const GridField& omega, const std::vector<Point>& points,
                                    PotentialMethod method = PotentialMethod::product);
// Same with the Dirichlet Green function of the disk (image-point kernel); interior points only.
PotentialResult dirichlet_green_potential(const GridField& omega, const std::vector<Point>& points,
                                          PotentialMethod method = PotentialMethod::product);

// Coefficients proportional to lambda^-1 from a seeded normal draw, scaled to unit V_0 norm.
SpectralField random_field(const TablePtr& table, std::uint64_t seed);

void write_grid_csv(const GridField& f, std::ostream& os);
std::string spectral_to_json(const SpectralField& f);

}  // namespace vortspec
