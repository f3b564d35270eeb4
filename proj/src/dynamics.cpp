#include "vacent/dynamics.hpp"

#include "vacent/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>

namespace vacent {

std::string_view to_string(PropagatorSource source) noexcept
{
    switch (source) {
    case PropagatorSource::normal_mode:
        return "normal-mode";
    case PropagatorSource::matrix_exponential:
        return "expm";
    }
    return "unknown";
}

PropagatorSource parse_propagator_source(std::string_view name)
{
    if (name == "normal-mode")
        return PropagatorSource::normal_mode;
    if (name == "expm" || name == "matrix-exponential")
        return PropagatorSource::matrix_exponential;
    throw InvalidParameter(fmt::format("unknown propagator '{}' (expected normal-mode or expm)", name));
}

double SymplecticPropagator::residual_bound() const
{
    const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues()(0);
    return 1e-10 * std::max(1.0, norm * norm);
}

namespace {

void check_time(double t)
{
    if (!std::isfinite(t))
        throw InvalidParameter("propagator: time must be finite");
}

// Per-mode diag(sqrt(nu), 1/sqrt(nu)) with nu the bare mode frequency.
Eigen::VectorXd balancing_scales(const QuadraticHamiltonian& H)
{
    const auto bare = H.bare_freqs();
    Eigen::VectorXd d(6);
    for (int a = 0; a < 3; ++a) {
        d(2 * a) = std::sqrt(bare[static_cast<std::size_t>(a)]);
        d(2 * a + 1) = 1.0 / d(2 * a);
    }
    return d;
}

} // namespace

SymplecticPropagator propagator_expm(const QuadraticHamiltonian& H, double t)
{
    check_time(t);
    const double phase = std::abs(t) * H.normal_freqs().maxCoeff();
    if (phase > max_expm_phase)
        throw StepTooLarge(fmt::format("propagator_expm: |t| * nu_max = {:.3g} exceeds {:.0e}; subdivide the interval",
                                       phase, max_expm_phase));

    SymplecticPropagator out;
    out.t = t;
    out.source = PropagatorSource::matrix_exponential;
    if (t == 0.0) {
        out.S = Eigen::MatrixXd::Identity(6, 6);
        return out;
    }

    const Eigen::MatrixXd generator = symplectic_form(3) * H.M();
    const Eigen::VectorXd d = balancing_scales(H);
    const Eigen::MatrixXd balanced = d.asDiagonal() * generator * d.cwiseInverse().asDiagonal();

    Eigen::MatrixXd flow;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(balanced);
    bool done = false;
    if (solver.info() == Eigen::Success) {
        const Eigen::MatrixXcd W = solver.eigenvectors();
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(W).singularValues();
        if (sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) < 1e6) {
            const Eigen::VectorXcd growth = (solver.eigenvalues() * t).array().exp();
            const Eigen::MatrixXcd expo = W * growth.asDiagonal() * W.inverse();
            flow = expo.real();
            done = true;
        }
    }
    if (!done)
        flow = (balanced * t).exp();

    out.S = d.cwiseInverse().asDiagonal() * flow * d.asDiagonal();
    return out;
}

SymplecticPropagator propagator_normal_mode(const QuadraticHamiltonian& H, double t)
{
    check_time(t);
    const Eigen::Matrix3d& R = H.normal_modes();
    const Eigen::Vector3d& nu = H.normal_freqs();

    Eigen::Vector3d c, s_over_nu, nu_s;
    for (int j = 0; j < 3; ++j) {
        const double arg = nu(j) * t;
        c(j) = std::cos(arg);
        s_over_nu(j) = std::sin(arg) / nu(j);
        nu_s(j) = nu(j) * std::sin(arg);
    }
    const Eigen::Matrix3d Sxx = R * c.asDiagonal() * R.transpose();
    const Eigen::Matrix3d Sxp = R * s_over_nu.asDiagonal() * R.transpose();
    const Eigen::Matrix3d Spx = -(R * nu_s.asDiagonal() * R.transpose());

    SymplecticPropagator out;
    out.t = t;
    out.source = PropagatorSource::normal_mode;
    out.S = Eigen::MatrixXd::Zero(6, 6);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            out.S(2 * a, 2 * b) = Sxx(a, b);
            out.S(2 * a, 2 * b + 1) = Sxp(a, b);
            out.S(2 * a + 1, 2 * b) = Spx(a, b);
            out.S(2 * a + 1, 2 * b + 1) = Sxx(a, b);
        }
    }
    return out;
}

SymplecticPropagator make_propagator(const QuadraticHamiltonian& H, double t, PropagatorSource source)
{
    return source == PropagatorSource::normal_mode ? propagator_normal_mode(H, t) : propagator_expm(H, t);
}

GaussianState evolve(const GaussianState& state, const SymplecticPropagator& propagator)
{
    const auto& S = propagator.S;
    if (S.rows() != static_cast<Eigen::Index>(state.layout().dim()) || S.cols() != S.rows())
        throw InvalidParameter("evolve: propagator dimension does not match the state layout");
    return GaussianState(state.layout(), S * state.mean(), S * state.cov() * S.transpose());
}

Trajectory trajectory(const QuadraticHamiltonian& H, const GaussianState& state0,
                      std::span<const double> t_grid, PropagatorSource source)
{
    if (t_grid.empty())
        throw InvalidParameter("trajectory: empty time grid");
    if (t_grid.front() < 0.0)
        throw InvalidParameter("trajectory: time grid must start at t >= 0");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw InvalidParameter("trajectory: time grid must be sorted ascending");

    Trajectory out;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.states.reserve(t_grid.size());
    out.symplectic_residuals.reserve(t_grid.size());
    for (double t : t_grid) {
        const auto S = make_propagator(H, t, source);
        out.states.push_back(evolve(state0, S));
        out.symplectic_residuals.push_back(S.residual());
    }
    return out;
}

std::vector<double> uniform_grid(double start, double stop, int points)
{
    if (points < 2)
        throw InvalidParameter("uniform_grid: need at least two points");
    if (!(stop > start))
        throw InvalidParameter("uniform_grid: stop must exceed start");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (int k = 0; k < points; ++k)
        grid[static_cast<std::size_t>(k)] = start + step * static_cast<double>(k);
    grid.back() = stop;
    return grid;
}

} // namespace vacent
