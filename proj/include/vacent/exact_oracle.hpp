#ifndef VACENT_EXACT_ORACLE_HPP
#define VACENT_EXACT_ORACLE_HPP

#include "vacent/dicke_model.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace vacent {

/**
  Symmetric Dicke sector of each ensemble (j_i = N_i / 2) times a Fock space
  truncated at `photon_cutoff` photons.

  Basis order is spin-1 (x) spin-2 (x) Fock, lexicographic, with each spin
  index running from m = -j (index 0) to m = +j:
      index = (k1 * (N2 + 1) + k2) * (photon_cutoff + 1) + n
*/
class TruncatedSpace
{
public:
    static constexpr std::size_t max_dim = 200000;

    TruncatedSpace(int N1, int N2, int photon_cutoff);

    int N1() const noexcept { return N1_; }
    int N2() const noexcept { return N2_; }
    int photon_cutoff() const noexcept { return cutoff_; }

    std::size_t spin_dim(int ensemble) const noexcept { return static_cast<std::size_t>(ensemble == 1 ? N1_ + 1 : N2_ + 1); }
    std::size_t fock_dim() const noexcept { return static_cast<std::size_t>(cutoff_ + 1); }
    std::size_t dim() const noexcept { return spin_dim(1) * spin_dim(2) * fock_dim(); }

    std::size_t index(int k1, int k2, int n) const noexcept
    {
        return (static_cast<std::size_t>(k1) * spin_dim(2) + static_cast<std::size_t>(k2)) * fock_dim() +
               static_cast<std::size_t>(n);
    }

    /// Angular-momentum projection m = k - j for spin index k of an ensemble.
    double m_value(int ensemble, int k) const noexcept { return k - 0.5 * (ensemble == 1 ? N1_ : N2_); }

private:
    int N1_, N2_, cutoff_;
};

using SparseOperator = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;
using SparseHamiltonian = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ExactState
{
    Eigen::VectorXcd amplitudes;
    double t = 0.0;
};

/**
  omega0 a^dag a + sum_i [ omega J_z,i + g_i (a + a^dag)(J_+,i + J_-,i) ]
  with all four products of the coupling kept. g_2 = g cos(phi), as in the
  harmonic model. N1 and N2 of `params` are ignored in favour of the space.
*/
SparseHamiltonian build_exact_hamiltonian(const PhysicalParams& params, const TruncatedSpace& space);

/// |m1 = -j1, m2 = -j2, n = 0>: the ground state without coupling.
ExactState decoupled_ground_state(const TruncatedSpace& space);

struct KrylovOptions
{
    int krylov_dim = 30;
    double step_tolerance = 1e-12;  ///< a posteriori Lanczos error allowed per sub-step
    int max_substeps = 100000;
};

/// psi(t0 + t) = exp(-i H t) psi(t0) by Lanczos propagation with adaptive sub-steps.
ExactState evolve_exact(const SparseHamiltonian& H, const ExactState& psi0, double t,
                        const KrylovOptions& options = {});

double exact_energy(const SparseHamiltonian& H, const ExactState& psi);

/// Lowest eigenvalue by dense diagonalization; dimension capped at 2000.
double ground_state_energy(const SparseHamiltonian& H);

/**
  Moments of the exact state. `quadrature_mean` / `quadrature_cov` are
  mapped onto the harmonic-model layout (ensemble-1, ensemble-2, cavity)
  through x_i = sqrt(2) J_x,i / sqrt(omega N_i), p_i = -sqrt(2 omega) J_y,i / sqrt(N_i),
  x_c = (a + a^dag)/sqrt(2 omega0), p_c = i sqrt(omega0)(a^dag - a)/sqrt(2),
  in the doubled symmetrized convention.
*/
struct ExactMoments
{
    std::array<Eigen::Vector3d, 2> spin_mean;  ///< (<J_x>, <J_y>, <J_z>) per ensemble
    Eigen::Matrix4d spin_second;               ///< <{A, B}>/2 over (J_x1, J_y1, J_x2, J_y2)
    Eigen::Vector2d photon_mean;               ///< (<x_c>, <p_c>)
    Eigen::Matrix2d photon_second;             ///< <{A, B}>/2 over (x_c, p_c)
    Eigen::VectorXd quadrature_mean;
    Eigen::MatrixXd quadrature_cov;
};

ExactMoments exact_moments(const ExactState& psi, const TruncatedSpace& space, const PhysicalParams& params);

/// log2 of the trace norm of the spin-spin density matrix transposed on ensemble 2.
double exact_log_negativity(const ExactState& psi, const TruncatedSpace& space);

struct CutoffPolicy
{
    int initial_cutoff = 10;
    int max_cutoff = 320;
    double tolerance = 1e-6;  ///< max change of mapped moments when the cutoff doubles
};

struct ExactRun
{
    TruncatedSpace space;
    ExactState psi;
    ExactMoments moments;
    double cutoff_change = 0.0;  ///< moment change between the last two cutoffs
    bool converged = false;
    double energy_drift = 0.0;   ///< relative change of <H> over the run
};

/// Evolves the decoupled ground state to time t, doubling the photon cutoff until moments settle.
ExactRun run_exact(const PhysicalParams& params, double t, const CutoffPolicy& policy = {},
                   const KrylovOptions& krylov = {});

struct OracleLadderOptions
{
    std::vector<int> ladder{2, 4, 8};
    double coupling_fraction = 0.94;  ///< G / G_crit
    double time = 0.01;               ///< in units of the coupling at ladder.front()
    CutoffPolicy cutoff;
};

struct OracleLadderPoint
{
    int N = 0;
    double g = 0.0;
    int photon_cutoff = 0;
    double cutoff_change = 0.0;
    bool converged = false;
    double max_deviation = 0.0;    ///< max |exact - Gaussian| over the two-ensemble 4x4 block
    Eigen::MatrixXd exact_cov;     ///< 4x4
};

struct OracleLadderResult
{
    double omega = 0.0;            ///< = omega0, units of the reference coupling
    double collective = 0.0;       ///< G = 2 g sqrt(N omega omega0), fixed along the ladder
    Eigen::MatrixXd gaussian_cov;  ///< 4x4 prediction of the harmonic model
    std::vector<OracleLadderPoint> points;

    bool monotone_decreasing() const;
    bool all_converged() const;
};

/**
  Resonant ladder at fixed omega = omega0 and fixed G. The reference coupling
  g_ref = 1 belongs to N = ladder.front(), and omega is chosen so that
  G = coupling_fraction * omega^2 / sqrt(2). Every rung uses
  g_N = G / (2 sqrt(N) omega) and the same absolute time.
*/
OracleLadderResult oracle_convergence(const OracleLadderOptions& options);

struct NegativityScan
{
    std::vector<double> times;
    std::vector<double> values;
    int photon_cutoff = 0;
    double max_value = 0.0;
    double t_at_max = 0.0;
};

/// Exact negativity along `t_grid` from the decoupled ground state at a fixed cutoff.
NegativityScan exact_negativity_scan(const PhysicalParams& params, int photon_cutoff,
                                     const std::vector<double>& t_grid, const KrylovOptions& krylov = {});

} // namespace vacent

#endif
