#include "vacent/dicke_model.hpp"

#include "vacent/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace vacent {

const ModeLayout& system_layout()
{
    static const ModeLayout layout({ensemble1_label, ensemble2_label, cavity_label});
    return layout;
}

void PhysicalParams::validate() const
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(omega))
        throw InvalidParameter(fmt::format("omega must be positive (got {})", omega));
    if (!positive(omega0))
        throw InvalidParameter(fmt::format("omega0 must be positive (got {})", omega0));
    if (!std::isfinite(g) || g < 0.0)
        throw InvalidParameter(fmt::format("g must be non-negative (got {})", g));
    if (N1 < 1 || N2 < 1)
        throw InvalidParameter(fmt::format("molecule counts must be >= 1 (got N1={}, N2={})", N1, N2));
    if (!std::isfinite(phi))
        throw InvalidParameter("phi must be finite");
    if (!std::isfinite(nbar_ensembles) || nbar_ensembles < 0.0)
        throw InvalidParameter(fmt::format("nbar_ensembles must be >= 0 (got {})", nbar_ensembles));
    if (!std::isfinite(nbar_cavity) || nbar_cavity < 0.0)
        throw InvalidParameter(fmt::format("nbar_cavity must be >= 0 (got {})", nbar_cavity));
}

double PhysicalParams::coupling(int ensemble) const
{
    return ensemble == 1 ? g : g * std::cos(phi);
}

double collective_coupling(const PhysicalParams& params, int ensemble)
{
    const auto n = static_cast<double>(params.molecules(ensemble));
    return 2.0 * params.coupling(ensemble) * std::sqrt(n * params.omega * params.omega0);
}

double critical_coupling(const PhysicalParams& params)
{
    const double c = std::cos(params.phi);
    const double weight = static_cast<double>(params.N1) + static_cast<double>(params.N2) * c * c;
    return std::sqrt(params.omega * params.omega0) / (2.0 * std::sqrt(weight));
}

double critical_omega_resonant(double g, std::int64_t N)
{
    return 2.0 * std::sqrt(2.0) * g * std::sqrt(static_cast<double>(N));
}

QuadraticHamiltonian build_hamiltonian(const PhysicalParams& params)
{
    params.validate();

    QuadraticHamiltonian H;
    H.params_ = params;

    Eigen::Matrix3d V = Eigen::Matrix3d::Zero();
    V(0, 0) = params.omega * params.omega;
    V(1, 1) = params.omega * params.omega;
    V(2, 2) = params.omega0 * params.omega0;
    V(0, 2) = V(2, 0) = collective_coupling(params, 1);
    V(1, 2) = V(2, 1) = collective_coupling(params, 2);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(V);
    const Eigen::Vector3d eig = solver.eigenvalues();
    if (!(eig.minCoeff() > 0.0)) {
        const double gc = critical_coupling(params);
        throw UnstableRegime(
            fmt::format("unstable regime: lowest normal-mode frequency squared is {:.6g} <= 0; "
                        "coupling g={:.6g} must stay below the critical coupling g_c={:.6g} "
                        "(omega*omega0 > 4 g^2 (N1 + N2 cos^2 phi))",
                        eig.minCoeff(), params.g, gc),
            gc);
    }

    H.V_ = V;
    H.normal_freqs_ = eig.cwiseSqrt();
    H.normal_modes_ = solver.eigenvectors();

    H.M_ = Eigen::MatrixXd::Zero(6, 6);
    for (int a = 0; a < 3; ++a) {
        H.M_(2 * a + 1, 2 * a + 1) = 1.0;
        for (int b = 0; b < 3; ++b)
            H.M_(2 * a, 2 * b) = V(a, b);
    }
    return H;
}

GaussianState initial_state(const PhysicalParams& params)
{
    params.validate();
    const std::array<double, 3> freqs{params.omega, params.omega, params.omega0};
    const std::array<double, 3> nbars{params.nbar_ensembles, params.nbar_ensembles, params.nbar_cavity};
    return thermal_state(system_layout(), freqs, nbars);
}

double energy(const QuadraticHamiltonian& H, const GaussianState& state)
{
    if (state.layout().dim() != 6)
        throw InvalidParameter("energy: state must live on the three-mode system layout");
    return 0.25 * (H.M() * state.cov()).trace() + 0.5 * state.mean().dot(H.M() * state.mean());
}

std::array<double, 2> hp_ratios(const GaussianState& state, const PhysicalParams& params)
{
    if (!(state.layout() == system_layout()))
        throw InvalidParameter("hp_validity: state must use the three-mode system layout");
    if (state.mean().cwiseAbs().maxCoeff() > 1e-9)
        throw UnsupportedState("hp_validity: only zero-mean states are supported");

    const double w = params.omega;
    std::array<double, 2> r{};
    for (int i = 0; i < 2; ++i) {
        const double sxx = state.cov()(2 * i, 2 * i);
        const double spp = state.cov()(2 * i + 1, 2 * i + 1);
        // <A^2> = sigma_AA / 2 for zero mean.
        const double excitation = 0.5 * spp + 0.5 * w * w * sxx;
        r[static_cast<std::size_t>(i)] = excitation / (2.0 * w * static_cast<double>(params.molecules(i + 1)));
    }
    return r;
}

HpValidityReport hp_validity(std::span<const GaussianState> trajectory, const PhysicalParams& params)
{
    HpValidityReport report;
    report.ratios.reserve(trajectory.size());
    for (const auto& state : trajectory) {
        const auto r = hp_ratios(state, params);
        report.ratios.push_back(r);
        report.max_ratio[0] = std::max(report.max_ratio[0], r[0]);
        report.max_ratio[1] = std::max(report.max_ratio[1], r[1]);
    }
    report.exceeds_threshold = report.overall_max() > HpValidityReport::threshold;
    return report;
}

} // namespace vacent
