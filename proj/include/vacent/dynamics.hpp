#ifndef VACENT_DYNAMICS_HPP
#define VACENT_DYNAMICS_HPP

#include "vacent/dicke_model.hpp"
#include "vacent/symplectic.hpp"

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace vacent {

enum class PropagatorSource { normal_mode, matrix_exponential };

std::string_view to_string(PropagatorSource source) noexcept;
/// Accepts "normal-mode" and "expm"/"matrix-exponential". Throws InvalidParameter otherwise.
PropagatorSource parse_propagator_source(std::string_view name);

/// Heisenberg flow X(t) = S(t) X(0) of a quadratic Hamiltonian.
struct SymplecticPropagator
{
    Eigen::MatrixXd S;
    double t = 0.0;
    PropagatorSource source = PropagatorSource::normal_mode;

    double residual() const { return symplectic_residual(S); }
    /// Bound used by the symplectic invariant: 1e-10 max(1, ||S||_2^2).
    double residual_bound() const;
};

/// |t| * (largest normal frequency) beyond which propagator_expm refuses to run.
inline constexpr double max_expm_phase = 1e6;

/**
  S = exp(Omega M t). The generator is first balanced with the per-mode
  scaling diag(sqrt(nu), 1/sqrt(nu)) (nu = bare mode frequency), then
  exponentiated through its complex eigendecomposition. Padé
  scaling-and-squaring is the fallback when the eigenbasis is ill-conditioned.
*/
SymplecticPropagator propagator_expm(const QuadraticHamiltonian& H, double t);

/// Closed-form flow from the orthogonal diagonalization V = R diag(nu^2) R^T.
SymplecticPropagator propagator_normal_mode(const QuadraticHamiltonian& H, double t);

SymplecticPropagator make_propagator(const QuadraticHamiltonian& H, double t, PropagatorSource source);

/// mean -> S mean, cov -> S cov S^T.
GaussianState evolve(const GaussianState& state, const SymplecticPropagator& propagator);

struct Trajectory
{
    std::vector<double> times;
    std::vector<GaussianState> states;
    std::vector<double> symplectic_residuals;
};

/// Each point is propagated directly from state0, never step-to-step.
Trajectory trajectory(const QuadraticHamiltonian& H, const GaussianState& state0,
                      std::span<const double> t_grid,
                      PropagatorSource source = PropagatorSource::normal_mode);

/// `points` values evenly spaced over [start, stop], both ends included.
std::vector<double> uniform_grid(double start, double stop, int points);

} // namespace vacent

#endif
