#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vortspec/specfun.hpp"

namespace vortspec {

enum class Parity { cosine, sine };

struct ModeIndex {
    int k = 0;
    int j = 1;
    Parity parity = Parity::cosine;

    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

// Validating constructor; rejects (0, j, sine).
ModeIndex make_mode(int k, int j, Parity parity);

std::string to_string(const ModeIndex& m);

// Eigenpairs of -Laplacian on the disk vorticity space, sorted by eigenvalue
// with ties broken by (k, parity).
class EigenTable {
public:
    int max_angular() const { return K_; }
    int max_radial() const { return J_; }
    std::size_t size() const { return modes_.size(); }

    const std::vector<ModeIndex>& modes() const { return modes_; }
    const std::vector<double>& eigenvalues() const { return lambda_; }
    const std::vector<double>& norm_constants() const { return norm_; }
    const specfun::QuadratureRule& quadrature() const { return quad_; }

    double eigenvalue(std::size_t n) const { return lambda_[n]; }
    double sqrt_eigenvalue(std::size_t n) const { return alpha_[n]; }
    double norm_constant(std::size_t n) const { return norm_[n]; }
    // J_k(sqrt(lambda)) for mode n: the boundary value of the radial profile.
    double boundary_bessel(std::size_t n) const { return jk_at_one_[n]; }

    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }

    // Throws std::out_of_range when the mode is absent.
    std::size_t index_of(const ModeIndex& m) const;
    // -1 when absent.
    long find(int k, int j, Parity p) const;

    // Largest deviation of the quadrature L2 norm from 1 seen at build time.
    double normalization_error() const { return norm_error_; }

    friend std::shared_ptr<const EigenTable> build_table(int K, int J, int quad_points);

private:
    int K_ = 0;
    int J_ = 0;
    std::vector<ModeIndex> modes_;
    std::vector<double> lambda_;
    std::vector<double> alpha_;
    std::vector<double> norm_;
    std::vector<double> jk_at_one_;
    std::vector<long> lookup_;  // [(k * J + j - 1) * 2 + parity]
    specfun::QuadratureRule quad_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
    double norm_error_ = 0.0;
};

using TablePtr = std::shared_ptr<const EigenTable>;

TablePtr build_table(int K, int J, int quad_points);

// Default radial point count that resolves the table's profiles.
int recommended_quad_points(int K, int J);

double eigenfunction_eval(const EigenTable& table, const ModeIndex& mode, double r, double theta);

// Quadrature moments of a mode against the orthonormal harmonic basis of
// degree m = 0..max_moment with matching parity.
std::vector<double> membership_residuals(const EigenTable& table, const ModeIndex& mode,
                                         int max_moment);

// JSON dump: list of {k, j, parity, eigenvalue, norm_constant}.
std::string table_to_json(const EigenTable& table);

}  // namespace vortspec
