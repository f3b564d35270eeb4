#ifndef VACENT_DICKE_MODEL_HPP
#define VACENT_DICKE_MODEL_HPP

#include "vacent/symplectic.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vacent {

inline const std::string ensemble1_label = "ensemble-1";
inline const std::string ensemble2_label = "ensemble-2";
inline const std::string cavity_label = "cavity";

/// Layout shared by every three-mode state in this library: (ensemble-1, ensemble-2, cavity).
const ModeLayout& system_layout();

/**
  Two molecular ensembles coupled to one cavity mode. Frequencies are in
  units of the single-molecule coupling g and time in units of 1/g.

  Ensemble 2 couples with g cos(phi): the relative phase between the two
  coupling points is projected onto the cavity quadrature that couples,
  which is exact for phi = 0 and phi = pi.
*/
struct PhysicalParams
{
    double omega = 300.0;   ///< molecular transition frequency
    double omega0 = 300.0;  ///< cavity frequency
    double g = 1.0;         ///< single-molecule Rabi coupling
    std::int64_t N1 = 10000;
    std::int64_t N2 = 10000;
    double phi = 0.0;       ///< relative coupling phase 2 pi omega d / c
    double nbar_ensembles = 0.0;
    double nbar_cavity = 0.0;

    /// Throws InvalidParameter on a violated invariant.
    void validate() const;

    double coupling(int ensemble) const;  // g_1 = g, g_2 = g cos(phi)
    std::int64_t molecules(int ensemble) const { return ensemble == 1 ? N1 : N2; }
};

/// 2 g_i sqrt(N_i omega omega0): the x_{a_i} x_c element of the potential matrix.
double collective_coupling(const PhysicalParams& params, int ensemble);

/**
  Largest single-molecule coupling for which the potential matrix stays
  positive definite at fixed frequencies:
  g_c = sqrt(omega omega0) / (2 sqrt(N1 + N2 cos^2 phi)).
*/
double critical_coupling(const PhysicalParams& params);

/// Resonant symmetric instability threshold for omega (= omega0): 2 sqrt(2) g sqrt(N).
double critical_omega_resonant(double g, std::int64_t N);

/**
  H = 1/2 X^T M X over X = (x_1, p_1, x_2, p_2, x_c, p_c).

  The momentum block is the identity, there are no x-p cross terms, and the
  position block V carries the bare frequencies squared on its diagonal and
  the collective couplings between each ensemble and the cavity.
*/
class QuadraticHamiltonian
{
public:
    const PhysicalParams& params() const noexcept { return params_; }
    const ModeLayout& layout() const noexcept { return system_layout(); }
    const Eigen::MatrixXd& M() const noexcept { return M_; }
    const Eigen::Matrix3d& V() const noexcept { return V_; }

    /// Normal-mode frequencies, ascending.
    const Eigen::Vector3d& normal_freqs() const noexcept { return normal_freqs_; }
    /// Orthonormal eigenvectors of V, one per column, matching normal_freqs().
    const Eigen::Matrix3d& normal_modes() const noexcept { return normal_modes_; }

    /// Bare (decoupled) frequency of each mode: (omega, omega, omega0).
    std::array<double, 3> bare_freqs() const noexcept { return {params_.omega, params_.omega, params_.omega0}; }

private:
    friend QuadraticHamiltonian build_hamiltonian(const PhysicalParams& params);
    QuadraticHamiltonian() = default;

    PhysicalParams params_;
    Eigen::MatrixXd M_;
    Eigen::Matrix3d V_;
    Eigen::Vector3d normal_freqs_;
    Eigen::Matrix3d normal_modes_;
};

/// Throws UnstableRegime when V is not positive definite.
QuadraticHamiltonian build_hamiltonian(const PhysicalParams& params);

/// Product state: ensembles thermal at omega with nbar_ensembles, cavity at omega0 with nbar_cavity.
GaussianState initial_state(const PhysicalParams& params);

/// <H> = 1/4 tr(M cov) + 1/2 mean^T M mean.
double energy(const QuadraticHamiltonian& H, const GaussianState& state);

/**
  Holstein-Primakoff depletion ratio r_i = <p_i^2 + omega^2 x_i^2> / (2 omega N_i)
  per ensemble, evaluated along a trajectory.
*/
struct HpValidityReport
{
    static constexpr double threshold = 0.01;

    std::vector<std::array<double, 2>> ratios;
    std::array<double, 2> max_ratio{0.0, 0.0};
    bool exceeds_threshold = false;

    double overall_max() const noexcept { return std::max(max_ratio[0], max_ratio[1]); }
};

std::array<double, 2> hp_ratios(const GaussianState& state, const PhysicalParams& params);

/// Throws UnsupportedState for states with non-zero mean.
HpValidityReport hp_validity(std::span<const GaussianState> trajectory, const PhysicalParams& params);

} // namespace vacent

#endif
