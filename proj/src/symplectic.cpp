#include "vacent/symplectic.hpp"

#include "vacent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <unordered_set>

namespace vacent {

ModeLayout::ModeLayout(std::vector<std::string> labels) : labels_(std::move(labels))
{
    if (labels_.empty())
        throw InvalidParameter("mode layout needs at least one mode");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_)
        if (!seen.insert(l).second)
            throw InvalidParameter("duplicate mode label '" + l + "'");
}

std::size_t ModeLayout::index_of(const std::string& label) const
{
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
        throw InvalidParameter("unknown mode label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

bool ModeLayout::contains(const std::string& label) const noexcept
{
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

Eigen::MatrixXd symplectic_form(std::size_t n_modes)
{
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

double symplectic_residual(const Eigen::MatrixXd& S)
{
    if (S.rows() != S.cols() || S.rows() % 2 != 0)
        throw InvalidParameter("symplectic_residual: matrix must be square with even dimension");
    const Eigen::MatrixXd omega = symplectic_form(static_cast<std::size_t>(S.rows() / 2));
    return (S * omega * S.transpose() - omega).cwiseAbs().maxCoeff();
}

GaussianState::GaussianState(ModeLayout layout, Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : layout_(std::move(layout)), mean_(std::move(mean)), cov_(std::move(cov))
{
    const auto d = static_cast<Eigen::Index>(layout_.dim());
    if (mean_.size() != d || cov_.rows() != d || cov_.cols() != d)
        throw InvalidParameter("gaussian state: mean/cov dimensions do not match layout");
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidParameter("gaussian state: covariance is not symmetric");
    // Remove round-off asymmetry so downstream eigen-solvers see an exactly symmetric matrix.
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

GaussianState vacuum_state(const ModeLayout& layout, std::span<const double> freqs)
{
    std::vector<double> zeros(freqs.size(), 0.0);
    return thermal_state(layout, freqs, zeros);
}

GaussianState thermal_state(const ModeLayout& layout, std::span<const double> freqs,
                            std::span<const double> nbars)
{
    if (freqs.size() != layout.n_modes() || nbars.size() != layout.n_modes())
        throw InvalidParameter("thermal_state: need one frequency and one occupation per mode");

    const auto d = static_cast<Eigen::Index>(layout.dim());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t k = 0; k < layout.n_modes(); ++k) {
        const double nu = freqs[k];
        const double nbar = nbars[k];
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw InvalidParameter("mode '" + layout.label(k) + "': frequency must be positive");
        if (!(nbar >= 0.0) || !std::isfinite(nbar))
            throw InvalidParameter("mode '" + layout.label(k) + "': occupation must be non-negative");
        const double scale = 2.0 * nbar + 1.0;
        cov(2 * k, 2 * k) = scale / nu;
        cov(2 * k + 1, 2 * k + 1) = scale * nu;
    }
    return GaussianState(layout, Eigen::VectorXd::Zero(d), std::move(cov));
}

GaussianState partial_trace(const GaussianState& state, std::span<const std::string> keep)
{
    if (keep.empty())
        throw InvalidParameter("partial_trace: keep set is empty");

    const auto& layout = state.layout();
    std::vector<std::size_t> modes;
    for (const auto& label : keep) {
        const std::size_t m = layout.index_of(label);
        if (std::find(modes.begin(), modes.end(), m) != modes.end())
            throw InvalidParameter("partial_trace: mode '" + label + "' listed twice");
        modes.push_back(m);
    }
    std::sort(modes.begin(), modes.end());

    std::vector<std::string> labels;
    std::vector<Eigen::Index> rows;
    for (std::size_t m : modes) {
        labels.push_back(layout.label(m));
        rows.push_back(static_cast<Eigen::Index>(ModeLayout::x_row(m)));
        rows.push_back(static_cast<Eigen::Index>(ModeLayout::p_row(m)));
    }

    const auto d = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd mean(d);
    Eigen::MatrixXd cov(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        mean(i) = state.mean()(rows[i]);
        for (Eigen::Index j = 0; j < d; ++j)
            cov(i, j) = state.cov()(rows[i], rows[j]);
    }
    return GaussianState(ModeLayout(std::move(labels)), std::move(mean), std::move(cov));
}

GaussianState partial_transpose(const GaussianState& state, const std::string& transposed_mode)
{
    if (state.n_modes() < 2)
        throw InvalidParameter("partial_transpose: state needs at least two modes");
    const auto p = static_cast<Eigen::Index>(ModeLayout::p_row(state.layout().index_of(transposed_mode)));

    Eigen::VectorXd mean = state.mean();
    Eigen::MatrixXd cov = state.cov();
    mean(p) = -mean(p);
    cov.row(p) *= -1.0;
    cov.col(p) *= -1.0;
    return GaussianState(state.layout(), std::move(mean), std::move(cov));
}

SymplecticSpectrum symplectic_spectrum(const Eigen::MatrixXd& cov)
{
    if (cov.rows() != cov.cols() || cov.rows() == 0 || cov.rows() % 2 != 0)
        throw InvalidParameter("symplectic_spectrum: covariance must be square with even dimension");
    const Eigen::Index n = cov.rows() / 2;

    // Per-mode scaling (x, p) -> (x/s, s p) is symplectic and leaves the spectrum
    // unchanged; choosing s so sigma_xx == sigma_pp keeps Omega cov well conditioned
    // when x and p carry different units.
    Eigen::MatrixXd balanced = cov;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double sxx = cov(2 * k, 2 * k);
        const double spp = cov(2 * k + 1, 2 * k + 1);
        if (!(sxx > 0.0 && spp > 0.0))
            continue;
        const double s = std::pow(sxx / spp, 0.25);
        balanced.row(2 * k) /= s;
        balanced.col(2 * k) /= s;
        balanced.row(2 * k + 1) *= s;
        balanced.col(2 * k + 1) *= s;
    }

    const Eigen::MatrixXd omega = symplectic_form(static_cast<std::size_t>(n));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(omega * balanced, false);
    if (solver.info() != Eigen::Success)
        throw NumericalDegeneracy("symplectic_spectrum: eigenvalue solver failed", INFINITY);

    std::vector<std::complex<double>> eig(solver.eigenvalues().begin(), solver.eigenvalues().end());
    std::sort(eig.begin(), eig.end(),
              [](const auto& a, const auto& b) { return a.imag() < b.imag(); });

    SymplecticSpectrum out;
    double residual = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        // eig[n - 1 - j] and eig[n + j] are the j-th smallest -i and +i partners.
        const auto& lower = eig[static_cast<std::size_t>(n - 1 - j)];
        const auto& upper = eig[static_cast<std::size_t>(n + j)];
        residual = std::max({residual, std::abs(lower.real()), std::abs(upper.real()),
                             std::abs(lower.imag() + upper.imag())});
        out.values.push_back(0.5 * (upper.imag() - lower.imag()));
    }
    std::sort(out.values.begin(), out.values.end());
    out.pairing_residual = residual;

    const double norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(balanced, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();
    if (residual > 1e-8 * std::max(norm, 1e-300))
        throw NumericalDegeneracy("symplectic_spectrum: eigenvalues of Omega*cov do not form +-i pairs", residual);
    return out;
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& cov)
{
    return symplectic_spectrum(cov).values;
}

double physicality_margin(const Eigen::MatrixXd& cov)
{
    if (cov.rows() != cov.cols() || cov.rows() % 2 != 0)
        throw InvalidParameter("physicality_margin: covariance must be square with even dimension");
    const Eigen::MatrixXd omega = symplectic_form(static_cast<std::size_t>(cov.rows() / 2));
    Eigen::MatrixXcd h = cov.cast<std::complex<double>>();
    h += std::complex<double>(0.0, 1.0) * omega.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool is_physical(const GaussianState& state, double tol)
{
    return physicality_margin(state.cov()) >= -tol;
}

} // namespace vacent
