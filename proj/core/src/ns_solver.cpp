#include "vortspec/ns_solver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vortspec {

std::vector<std::string> RunConfig::validate() const
{
    std::vector<std::string> err;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) err.push_back(msg);
    };
    need(std::isfinite(nu) && nu > 0.0, "nu must be positive");
    need(K >= 0 && K + 1 <= specfun::kMaxOrder, "K must lie in [0, 63]");
    need(J >= 1 && J <= 512, "J must lie in [1, 512]");
    need(quad_points == 0 || quad_points >= 2 * J + K + 8, "quad_points must be 0 or at least 2J+K+8");
    need(radial_points == 0 || radial_points >= 2 * J + K + 8,
         "radial_points must be 0 or at least 2J+K+8");
    need(angular_points == 0 || angular_points >= std::max(3 * K + 1, 2 * K + 2),
         "angular_points must be 0 or at least max(3K+1, 2K+2)");
    need(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    need(std::isfinite(T_final) && T_final > 0.0, "T_final must be positive");
    need(std::isfinite(dt) && std::isfinite(T_final) && dt <= T_final, "dt must not exceed T_final");
    need(output_every >= 1, "output_every must be at least 1");
    need(moment_tol > 0.0, "moment_tol must be positive");
    need(cfl > 0.0, "cfl must be positive");
    if (init.kind == InitSpec::Kind::random) {
        need(init.seed.has_value(), "random initial data needs a seed");
    } else {
        need(!init.modes.empty(), "mode initial data needs at least one mode");
        for (const auto& [m, c] : init.modes) {
            need(m.k <= K && m.j <= J, "initial mode " + to_string(m) + " outside the truncation");
            need(std::isfinite(c), "initial coefficient must be finite");
        }
    }
    return err;
}

int RunConfig::resolved_quad_points() const
{
    return quad_points > 0 ? quad_points : recommended_quad_points(K, J);
}

int RunConfig::resolved_radial_points() const
{
    return radial_points > 0 ? radial_points : resolved_quad_points() + 16;
}

int RunConfig::resolved_angular_points() const
{
    if (angular_points > 0) return angular_points;
    int m = std::max(3 * K + 1, 2 * K + 2);
    return m + (m % 2);
}

int RunConfig::steps() const { return static_cast<int>(std::lround(T_final / dt)); }

NsSolver::NsSolver(RunConfig cfg) : cfg_(std::move(cfg))
{
    const auto errors = cfg_.validate();
    if (!errors.empty()) {
        std::ostringstream os;
        os << "invalid run configuration:";
        for (const auto& e : errors) os << "\n  " << e;
        throw std::invalid_argument(os.str());
    }
    table_ = build_table(cfg_.K, cfg_.J, cfg_.resolved_quad_points());
    grid_ = make_grid(table_, cfg_.resolved_radial_points(), cfg_.resolved_angular_points());
    // omega_B is linear in the harmonic data: cache the response to each basis element.
    const int deg = grid_->harmonic_degree();
    for (int m = 0; m <= deg; ++m) {
        HarmonicExpansion h = HarmonicExpansion::zeros(deg);
        h.c[m] = 1.0;
        response_c_.push_back(elliptic_correction(h, cfg_.nu, grid_).omega_B);
        h.c[m] = 0.0;
        if (m > 0) {
            h.s[m] = 1.0;
            response_s_.push_back(elliptic_correction(h, cfg_.nu, grid_).omega_B);
        } else {
            response_s_.push_back(SpectralField::zeros(table_));
        }
    }
}

SpectralField NsSolver::initial_vorticity() const
{
    if (cfg_.init.kind == InitSpec::Kind::random) return random_field(table_, *cfg_.init.seed);
    SpectralField w = SpectralField::zeros(table_);
    for (const auto& [m, c] : cfg_.init.modes) w.at(m) += c;
    return w;
}

SpectralField NsSolver::correction_from(const HarmonicExpansion& h) const
{
    SpectralField w = SpectralField::zeros(table_);
    for (int m = 0; m <= h.degree && m < static_cast<int>(response_c_.size()); ++m) {
        for (std::size_t n = 0; n < w.size(); ++n) {
            w[n] += h.c[m] * response_c_[m][n] + h.s[m] * response_s_[m][n];
        }
    }
    return w;
}

SolverState NsSolver::state_from(const SpectralField& omega, double t) const
{
    SolverState s;
    s.time = t;
    if (cfg_.nonlinear) {
        AdvectionResult adv = advection(omega, grid_);
        s.omega_B = correction_from(adv.harmonic);
        s.prev_advection = std::move(adv);
    } else {
        s.omega_B = SpectralField::zeros(table_);
    }
    s.omega0 = omega - s.omega_B;
    s.prev_omega_B = s.omega_B;
    return s;
}

SolverState NsSolver::initial_state() const { return state_from(initial_vorticity(), 0.0); }

SpectralField NsSolver::rhs(const SpectralField& omega, AdvectionResult* adv) const
{
    AdvectionResult a = advection(omega, grid_);
    const SpectralField wb = correction_from(a.harmonic);
    SpectralField out = SpectralField::zeros(table_);
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = cfg_.nu * table_->eigenvalue(n) * wb[n] - a.projected[n];
    }
    if (adv) *adv = std::move(a);
    return out;
}

double NsSolver::max_moment(const SpectralField& omega) const
{
    return from_grid(to_grid(omega, grid_), table_).harmonic.max_abs();
}

double NsSolver::cfl_number(const SpectralField& omega) const
{
    const SpectralField psi = biot_savart(omega);
    const GridField pr = to_grid(psi, grid_, Derivative::d_r);
    const GridField pt = to_grid(psi, grid_, Derivative::d_theta);
    double umax = 0.0;
    for (int i = 0; i < grid_->nr(); ++i) {
        for (int m = 0; m < grid_->nt(); ++m) {
            const double ut = pt.at(i, m) / grid_->r(i);
            umax = std::max(umax, std::hypot(pr.at(i, m), ut));
        }
    }
    return cfg_.dt * umax * std::sqrt(table_->lambda_max());
}

double NsSolver::enstrophy_rate(const SpectralField& omega) const
{
    double rate = 0.0;
    const SpectralField n = cfg_.nonlinear ? rhs(omega) : SpectralField::zeros(table_);
    for (std::size_t i = 0; i < omega.size(); ++i) {
        rate += omega[i] * (n[i] - cfg_.nu * table_->eigenvalue(i) * omega[i]);
    }
    return rate;
}

SolverState NsSolver::step(const SolverState& s) const
{
    const SpectralField omega = s.omega();
    const double c = cfl_number(omega);
    if (c > cfg_.cfl) {
        std::ostringstream os;
        os << "CFL number " << c << " exceeds " << cfg_.cfl << " at t = " << s.time;
        throw std::runtime_error(os.str());
    }
    const double dt = cfg_.dt;
    SolverState next;
    next.time = s.time + dt;
    next.step = s.step + 1;

    if (!cfg_.nonlinear) {
        next.omega0 = propagate(s.omega0, cfg_.nu, dt);
        next.omega_B = SpectralField::zeros(table_);
        next.prev_omega_B = next.omega_B;
        return next;
    }

    if (cfg_.coupling == Coupling::integrated) {
        // Stage one reuses the cached advection of the current state.
        const Nonlinearity N = [&](const SpectralField& w, double) {
            if (&w == &omega && s.prev_advection) {
                const AdvectionResult& a = *s.prev_advection;
                const SpectralField wb = correction_from(a.harmonic);
                SpectralField out = SpectralField::zeros(table_);
                for (std::size_t n = 0; n < out.size(); ++n) {
                    out[n] = cfg_.nu * table_->eigenvalue(n) * wb[n] - a.projected[n];
                }
                return out;
            }
            return rhs(w);
        };
        const SpectralField w1 = etd_step(omega, N, cfg_.nu, s.time, dt, EtdScheme::etd2rk);
        AdvectionResult adv = advection(w1, grid_);
        next.omega_B = correction_from(adv.harmonic);
        next.omega0 = w1 - next.omega_B;
        next.prev_advection = std::move(adv);
        next.prev_omega_B = next.omega_B;
    } else {
        // omega_B from the current advection, then omega_0 driven by -P Lambda - d/dt omega_B.
        AdvectionResult adv = s.prev_advection ? *s.prev_advection : advection(omega, grid_);
        const SpectralField wb_new = correction_from(adv.harmonic);
        SpectralField f = (-1.0) * adv.projected;
        if (s.step > 0) f -= (1.0 / dt) * (wb_new - s.omega_B);
        const Forcing frozen = [&](double) { return f; };
        next.omega0 = duhamel_step(s.omega0, frozen, cfg_.nu, s.time, dt, EtdScheme::etd2rk);
        next.omega_B = wb_new;
        next.prev_omega_B = s.omega_B;
        next.prev_advection = advection(next.omega(), grid_);
    }

    const double drift = max_moment(next.omega());
    if (drift > 10.0 * cfg_.moment_tol) {
        std::ostringstream os;
        os << "harmonic moment drift " << drift << " exceeds 10 x moment_tol at t = " << next.time;
        throw std::runtime_error(os.str());
    }
    return next;
}

DiagnosticsRow NsSolver::diagnostics(const SolverState& s) const
{
    const SpectralField w = s.omega();
    DiagnosticsRow r = linear_diagnostics(s.time, w, max_moment(w));
    r.correction_norm = norm_at(s.omega_B, 0);
    return r;
}

Trajectory NsSolver::run() const
{
    if (!cfg_.nonlinear) return stokes_run();
    Trajectory tr;
    SolverState s = initial_state();
    tr.push(s.time, s.omega(), diagnostics(s));
    const int n = cfg_.steps();
    for (int k = 1; k <= n; ++k) {
        s = step(s);
        if (k % cfg_.output_every == 0 || k == n) tr.push(s.time, s.omega(), diagnostics(s));
    }
    return tr;
}

Trajectory NsSolver::stokes_run(const Forcing& forcing) const
{
    Trajectory tr;
    SpectralField w = initial_vorticity();
    auto row = [&](double t) { return linear_diagnostics(t, w, max_moment(w)); };
    tr.push(0.0, w, row(0.0));
    const int n = cfg_.steps();
    for (int k = 1; k <= n; ++k) {
        const double t0 = (k - 1) * cfg_.dt;
        if (forcing) {
            w = duhamel_step(w, forcing, cfg_.nu, t0, cfg_.dt, EtdScheme::etd2rk);
        } else {
            // exact in time: scale from the initial data to avoid accumulating rounding
            w = propagate(initial_vorticity(), cfg_.nu, k * cfg_.dt);
        }
        if (k % cfg_.output_every == 0 || k == n) tr.push(k * cfg_.dt, w, row(k * cfg_.dt));
    }
    return tr;
}

}  // namespace vortspec
