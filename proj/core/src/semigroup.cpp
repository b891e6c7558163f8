#include "vortspec/semigroup.hpp"

#include <cmath>
#include <stdexcept>

#include "vortspec/format.hpp"

namespace vortspec {

void Trajectory::push(double t, SpectralField state, std::optional<DiagnosticsRow> row)
{
    if (!times.empty() && !(t > times.back())) {
        throw std::invalid_argument("trajectory times must increase strictly");
    }
    if (!states.empty() && state.table != states.front().table) {
        throw std::invalid_argument("trajectory states must share one table");
    }
    if (row.has_value() != (diagnostics.size() == times.size()) && !times.empty()) {
        throw std::invalid_argument("diagnostics must be given for every sample or none");
    }
    times.push_back(t);
    states.push_back(std::move(state));
    if (row) diagnostics.push_back(*row);
}

std::vector<double> Trajectory::column(double DiagnosticsRow::*member) const
{
    std::vector<double> out;
    out.reserve(diagnostics.size());
    for (const DiagnosticsRow& r : diagnostics) out.push_back(r.*member);
    return out;
}

DiagnosticsRow linear_diagnostics(double t, const SpectralField& omega, double moment_drift)
{
    DiagnosticsRow r;
    r.t = t;
    r.energy = norm_at(omega, -1);
    r.enstrophy = norm_at(omega, 0);
    r.palinstrophy_norm = norm_at(omega, 1);
    r.moment_drift = moment_drift;
    return r;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os)
{
    os << "t,energy,enstrophy,palinstrophy_norm,moment_drift,correction_norm\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const DiagnosticsRow r = i < traj.diagnostics.size()
                                     ? traj.diagnostics[i]
                                     : linear_diagnostics(traj.times[i], traj.states[i]);
        os << format_real(r.t) << ',' << format_real(r.energy) << ',' << format_real(r.enstrophy)
           << ',' << format_real(r.palinstrophy_norm) << ',' << format_real(r.moment_drift) << ','
           << format_real(r.correction_norm) << '\n';
    }
}

SpectralField propagate(const SpectralField& field, double nu, double t)
{
    SpectralField out = field;
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] *= std::exp(-nu * field.table->eigenvalue(n) * t);
    }
    return out;
}

double phi1(double z)
{
    if (std::abs(z) < 1e-5) {
        // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 + z^5/720
        return 1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z / 720))));
    }
    return std::expm1(z) / z;
}

double phi2(double z)
{
    if (std::abs(z) < 1e-2) {
        double term = 0.5, sum = 0.5;
        for (int k = 3; k <= 12; ++k) {
            term *= z / k;
            sum += term;
        }
        return sum;
    }
    return (std::expm1(z) - z) / (z * z);
}

namespace {

void require_compatible(const SpectralField& u, const SpectralField& f)
{
    if (u.table != f.table || u.kind != f.kind) {
        throw std::invalid_argument("right-hand side lives on another table or kind");
    }
}

}  // namespace

SpectralField etd_step(const SpectralField& u, const Nonlinearity& rhs, double nu, double t,
                       double dt, EtdScheme scheme)
{
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const EigenTable& tab = *u.table;
    const SpectralField n0 = rhs(u, t);
    require_compatible(u, n0);
    SpectralField a = u;
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double z = -nu * tab.eigenvalue(n) * dt;
        a[n] = std::exp(z) * u[n] + dt * phi1(z) * n0[n];
    }
    if (scheme == EtdScheme::etd1) return a;

    const SpectralField n1 = rhs(a, t + dt);
    require_compatible(u, n1);
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double z = -nu * tab.eigenvalue(n) * dt;
        a[n] += dt * phi2(z) * (n1[n] - n0[n]);
    }
    return a;
}

SpectralField duhamel_step(const SpectralField& u, const Forcing& forcing, double nu, double t,
                           double dt, EtdScheme scheme)
{
    return etd_step(u, [&](const SpectralField&, double s) { return forcing(s); }, nu, t, dt, scheme);
}

DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                        std::optional<std::pair<double, double>> window)
{
    if (times.size() != values.size() || times.empty()) {
        throw std::invalid_argument("decay fit needs aligned, nonempty series");
    }
    DecayFit fit;
    fit.window = window.value_or(
        std::make_pair(times.front() + 0.5 * (times.back() - times.front()), times.back()));
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < fit.window.first || times[i] > fit.window.second) continue;
        if (!(values[i] > 0.0)) {
            throw std::domain_error("decay fit needs strictly positive values in the window");
        }
        pts.emplace_back(times[i], std::log(values[i]));
    }
    if (pts.size() < 4) throw std::invalid_argument("decay fit needs at least 4 samples in the window");
    const double n = static_cast<double>(pts.size());
    for (const auto& [t, y] : pts) {
        st += t;
        sy += y;
    }
    const double tm = st / n, ym = sy / n;
    for (const auto& [t, y] : pts) {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
    }
    if (stt == 0.0) throw std::invalid_argument("decay fit window has no time spread");
    const double slope = sty / stt;
    fit.rate = -slope;
    fit.intercept = ym - slope * tm;
    double ss_res = 0, ss_tot = 0;
    for (const auto& [t, y] : pts) {
        const double e = y - (fit.intercept + slope * t);
        ss_res += e * e;
        ss_tot += (y - ym) * (y - ym);
    }
    fit.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    fit.samples = pts.size();
    return fit;
}

}  // namespace vortspec
