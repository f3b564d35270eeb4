#ifndef VACENT_SYMPLECTIC_HPP
#define VACENT_SYMPLECTIC_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vacent {

/**
  Ordered set of bosonic modes. Quadratures are interleaved per mode,
  X = (x_1, p_1, x_2, p_2, ..., x_n, p_n), so mode k owns rows 2k and 2k+1.
*/
class ModeLayout
{
public:
    explicit ModeLayout(std::vector<std::string> labels);

    std::size_t n_modes() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return 2 * labels_.size(); }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t mode) const { return labels_.at(mode); }

    // Throws InvalidParameter for unknown labels.
    std::size_t index_of(const std::string& label) const;
    bool contains(const std::string& label) const noexcept;

    static std::size_t x_row(std::size_t mode) noexcept { return 2 * mode; }
    static std::size_t p_row(std::size_t mode) noexcept { return 2 * mode + 1; }

    bool operator==(const ModeLayout&) const = default;

private:
    std::vector<std::string> labels_;
};

/// Block-diagonal canonical form, one [[0, 1], [-1, 0]] block per mode.
Eigen::MatrixXd symplectic_form(std::size_t n_modes);

/// max |S Omega S^T - Omega|. Zero for an exactly symplectic S.
double symplectic_residual(const Eigen::MatrixXd& S);

/**
  Mean vector and covariance of a Gaussian state.

  The covariance uses the doubled symmetrized convention
  sigma_jk = <X_j X_k + X_k X_j> - 2 <X_j><X_k>, so the vacuum of a mode with
  frequency nu is diag(1/nu, nu) and its symplectic eigenvalue is exactly 1.

  Construction only checks shape and symmetry. Physicality is a separate
  query because partially transposed matrices reuse this type.
*/
class GaussianState
{
public:
    GaussianState(ModeLayout layout, Eigen::VectorXd mean, Eigen::MatrixXd cov);

    const ModeLayout& layout() const noexcept { return layout_; }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& cov() const noexcept { return cov_; }
    std::size_t n_modes() const noexcept { return layout_.n_modes(); }

private:
    ModeLayout layout_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

GaussianState vacuum_state(const ModeLayout& layout, std::span<const double> freqs);

// Per-mode block (2 nbar + 1) diag(1/nu, nu).
GaussianState thermal_state(const ModeLayout& layout, std::span<const double> freqs,
                            std::span<const double> nbars);

/// Marginal on `keep`. Kept modes stay in their original layout order.
GaussianState partial_trace(const GaussianState& state, std::span<const std::string> keep);

/// Time reversal on one mode: p_j -> -p_j in mean and covariance.
GaussianState partial_transpose(const GaussianState& state, const std::string& transposed_mode);

/**
  Symplectic spectrum of a covariance matrix: the values gamma_j with
  spec(Omega cov) = {+-i gamma_j}, sorted ascending.

  `pairing_residual` is the largest real part among the eigenvalues of
  Omega cov, together with any mismatch between the +i and -i partners. The
  computation throws NumericalDegeneracy when it exceeds 1e-8 ||cov||.
*/
struct SymplecticSpectrum
{
    std::vector<double> values;
    double pairing_residual = 0.0;
};

SymplecticSpectrum symplectic_spectrum(const Eigen::MatrixXd& cov);
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& cov);

/// Smallest eigenvalue of the Hermitian matrix cov + i Omega.
double physicality_margin(const Eigen::MatrixXd& cov);

inline constexpr double physicality_tolerance = 1e-9;

bool is_physical(const GaussianState& state, double tol = physicality_tolerance);

} // namespace vacent

#endif
