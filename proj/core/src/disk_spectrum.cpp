#include "vortspec/disk_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace vortspec {

namespace {

constexpr double kPi = std::numbers::pi;

double angular_measure(int k) { return k == 0 ? 2.0 * kPi : kPi; }

double trig(int k, Parity p, double theta)
{
    return p == Parity::cosine ? std::cos(k * theta) : std::sin(k * theta);
}

}  // namespace

ModeIndex make_mode(int k, int j, Parity parity)
{
    if (k < 0 || j < 1) throw std::invalid_argument("mode needs k >= 0 and j >= 1");
    if (k == 0 && parity == Parity::sine) {
        throw std::invalid_argument("sine parity is not defined for k = 0");
    }
    return ModeIndex{k, j, parity};
}

std::string to_string(const ModeIndex& m)
{
    std::ostringstream os;
    os << "(" << m.k << "," << m.j << "," << (m.parity == Parity::cosine ? "cos" : "sin") << ")";
    return os.str();
}

std::size_t EigenTable::index_of(const ModeIndex& m) const
{
    const long n = find(m.k, m.j, m.parity);
    if (n < 0) throw std::out_of_range("mode " + to_string(m) + " not in table");
    return static_cast<std::size_t>(n);
}

long EigenTable::find(int k, int j, Parity p) const
{
    if (k < 0 || k > K_ || j < 1 || j > J_) return -1;
    return lookup_[(static_cast<std::size_t>(k) * J_ + (j - 1)) * 2 + (p == Parity::sine ? 1 : 0)];
}

int recommended_quad_points(int K, int J)
{
    const double alpha = specfun::bessel_j_zero(K + 1, J);
    return std::max(2 * J + K + 8, static_cast<int>(std::ceil(1.5 * alpha)) + 16);
}

TablePtr build_table(int K, int J, int quad_points)
{
    if (K < 0 || J < 1) throw std::invalid_argument("build_table needs K >= 0 and J >= 1");
    if (K + 1 > specfun::kMaxOrder) throw std::invalid_argument("angular truncation too large");
    if (quad_points < 2 * J + K + 8) {
        throw std::invalid_argument("build_table needs quad_points >= 2J + K + 8");
    }

    struct Entry {
        ModeIndex mode;
        double alpha;
    };
    std::vector<Entry> entries;
    for (int k = 0; k <= K; ++k) {
        for (int j = 1; j <= J; ++j) {
            const double alpha = specfun::bessel_j_zero(k + 1, j);
            entries.push_back({ModeIndex{k, j, Parity::cosine}, alpha});
            if (k > 0) entries.push_back({ModeIndex{k, j, Parity::sine}, alpha});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::make_tuple(a.alpha, a.mode.k, a.mode.parity) <
               std::make_tuple(b.alpha, b.mode.k, b.mode.parity);
    });

    auto table = std::make_shared<EigenTable>();
    table->K_ = K;
    table->J_ = J;
    table->quad_ = specfun::gauss_legendre(quad_points, 0.0, 1.0);
    table->lookup_.assign(static_cast<std::size_t>(K + 1) * J * 2, -1);

    for (const Entry& e : entries) {
        const int k = e.mode.k;
        const double jk = specfun::bessel_j(k, e.alpha);
        const double half = specfun::bessel_j(k, 0.5 * e.alpha);
        const double sign = (half < 0.0 && std::abs(half) > 1e-12) ? -1.0 : 1.0;
        const double c = sign * std::sqrt(2.0 / angular_measure(k)) / std::abs(jk);

        const std::size_t n = table->modes_.size();
        table->lookup_[(static_cast<std::size_t>(k) * J + (e.mode.j - 1)) * 2 +
                       (e.mode.parity == Parity::sine ? 1 : 0)] = static_cast<long>(n);
        table->modes_.push_back(e.mode);
        table->alpha_.push_back(e.alpha);
        table->lambda_.push_back(e.alpha * e.alpha);
        table->norm_.push_back(c);
        table->jk_at_one_.push_back(jk);
    }
    table->lambda_min_ = table->lambda_.front();
    table->lambda_max_ = table->lambda_.back();

    // Closed-form normalization checked by an independent, finer rule.
    const int nver = std::max(quad_points, static_cast<int>(std::ceil(table->alpha_.back())) + 40);
    const auto ver = specfun::gauss_legendre(nver, 0.0, 1.0);
    double worst = 0.0;
    for (std::size_t n = 0; n < table->size(); ++n) {
        const int k = table->modes_[n].k;
        double s = 0.0;
        for (int i = 0; i < nver; ++i) {
            const double rho = table->norm_[n] * specfun::bessel_j(k, table->alpha_[n] * ver.nodes[i]);
            s += ver.weights[i] * ver.nodes[i] * rho * rho;
        }
        worst = std::max(worst, std::abs(s * angular_measure(k) - 1.0));
    }
    table->norm_error_ = worst;
    if (worst > 1e-10) {
        throw std::runtime_error("eigenfunction normalization check failed");
    }
    return table;
}

double eigenfunction_eval(const EigenTable& table, const ModeIndex& mode, double r, double theta)
{
    const std::size_t n = table.index_of(mode);
    return table.norm_constant(n) * specfun::bessel_j(mode.k, table.sqrt_eigenvalue(n) * r) *
           trig(mode.k, mode.parity, theta);
}

std::vector<double> membership_residuals(const EigenTable& table, const ModeIndex& mode,
                                         int max_moment)
{
    const std::size_t n = table.index_of(mode);
    const auto& q = table.quadrature();
    if (max_moment < 0 || max_moment > 2 * q.order - 2) {
        throw std::invalid_argument("max_moment exceeds quadrature capacity");
    }
    const int M = mode.k + max_moment + 2;
    std::vector<double> profile(q.order);
    for (int i = 0; i < q.order; ++i) {
        profile[i] = table.norm_constant(n) *
                     specfun::bessel_j(mode.k, table.sqrt_eigenvalue(n) * q.nodes[i]);
    }
    std::vector<double> out;
    for (int m = 0; m <= max_moment; ++m) {
        const Parity hp = m == 0 ? Parity::cosine : mode.parity;
        const double hn = m == 0 ? 1.0 / std::sqrt(kPi) : std::sqrt((2.0 * m + 2.0) / kPi);
        double ang = 0.0;
        for (int a = 0; a < M; ++a) {
            const double th = 2.0 * kPi * a / M;
            ang += trig(mode.k, mode.parity, th) * trig(m, hp, th);
        }
        ang *= 2.0 * kPi / M;
        double rad = 0.0;
        for (int i = 0; i < q.order; ++i) {
            rad += q.weights[i] * q.nodes[i] * profile[i] * std::pow(q.nodes[i], m);
        }
        out.push_back(hn * rad * ang);
    }
    return out;
}

std::string table_to_json(const EigenTable& table)
{
    nlohmann::json j;
    j["max_angular"] = table.max_angular();
    j["max_radial"] = table.max_radial();
    j["modes"] = nlohmann::json::array();
    for (std::size_t n = 0; n < table.size(); ++n) {
        const auto& m = table.modes()[n];
        j["modes"].push_back({{"k", m.k},
                              {"j", m.j},
                              {"parity", m.parity == Parity::cosine ? "cos" : "sin"},
                              {"eigenvalue", table.eigenvalue(n)},
                              {"norm_constant", table.norm_constant(n)}});
    }
    return j.dump(2);
}

}  // namespace vortspec
