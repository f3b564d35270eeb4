#include "vacent/homodyne.hpp"

#include "vacent/entanglement.hpp"
#include "vacent/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

namespace vacent {

namespace {

constexpr std::array<double, 3> lo_phases{0.0, std::numbers::pi / 4.0, std::numbers::pi / 2.0};
constexpr std::array<HomodyneTarget, 4> all_targets{HomodyneTarget::mode1, HomodyneTarget::mode2,
                                                    HomodyneTarget::bs_sum, HomodyneTarget::bs_difference};

void require_two_modes(const GaussianState& state, const char* where)
{
    if (state.n_modes() != 2)
        throw InvalidParameter(fmt::format("{}: expected a two-mode state, got {} modes", where, state.n_modes()));
}

int phase_slot(double phase)
{
    for (std::size_t k = 0; k < lo_phases.size(); ++k)
        if (std::abs(phase - lo_phases[k]) < 1e-12)
            return static_cast<int>(k);
    return -1;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// variances[target][phase slot]
struct VarianceTable
{
    std::array<std::array<double, 3>, 4> value{};
    std::array<std::array<double, 3>, 4> error{};
};

VarianceTable tabulate(std::span<const VarianceEstimate> variances)
{
    VarianceTable table;
    std::array<std::array<bool, 3>, 4> seen{};
    for (const auto& v : variances) {
        const int slot = phase_slot(v.setting.phase);
        if (slot < 0)
            throw InvalidParameter(fmt::format("reconstruct_covariance: unsupported LO phase {}", v.setting.phase));
        const auto t = static_cast<std::size_t>(v.setting.target);
        const auto s = static_cast<std::size_t>(slot);
        table.value[t][s] = v.variance;
        table.error[t][s] = v.std_error;
        seen[t][s] = true;
    }
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t s = 0; s < 3; ++s)
            if (!seen[t][s])
                throw InvalidParameter(fmt::format("reconstruct_covariance: missing setting ({}, phase {})",
                                                   to_string(all_targets[t]), lo_phases[s]));
    return table;
}

} // namespace

void ReadoutChannel::validate() const
{
    for (double eta : {eta1, eta2})
        if (!(eta >= 0.0 && eta <= 1.0))
            throw InvalidParameter(fmt::format("readout channel: efficiency {} outside [0, 1]", eta));
}

GaussianState to_readout_units(const GaussianState& state, std::span<const double> freqs)
{
    if (freqs.size() != state.n_modes())
        throw InvalidParameter("to_readout_units: need one frequency per mode");
    const auto d = static_cast<Eigen::Index>(state.layout().dim());
    Eigen::VectorXd scale(d);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        if (!(freqs[k] > 0.0))
            throw InvalidParameter("to_readout_units: frequencies must be positive");
        scale(static_cast<Eigen::Index>(2 * k)) = std::sqrt(freqs[k]);
        scale(static_cast<Eigen::Index>(2 * k + 1)) = 1.0 / std::sqrt(freqs[k]);
    }
    return GaussianState(state.layout(), scale.cwiseProduct(state.mean()),
                         scale.asDiagonal() * state.cov() * scale.asDiagonal());
}

GaussianState apply_readout_channel(const GaussianState& state, const ReadoutChannel& channel)
{
    require_two_modes(state, "apply_readout_channel");
    channel.validate();
    const std::array<double, 2> eta{channel.eta1, channel.eta2};

    Eigen::Vector4d amp;
    for (int k = 0; k < 2; ++k)
        amp.segment<2>(2 * k).setConstant(std::sqrt(eta[static_cast<std::size_t>(k)]));

    Eigen::MatrixXd cov = amp.asDiagonal() * state.cov() * amp.asDiagonal();
    for (int k = 0; k < 2; ++k)
        cov.block<2, 2>(2 * k, 2 * k) += (1.0 - eta[static_cast<std::size_t>(k)]) * Eigen::Matrix2d::Identity();
    return GaussianState(state.layout(), amp.cwiseProduct(state.mean()), std::move(cov));
}

GaussianState beam_splitter(const GaussianState& state)
{
    require_two_modes(state, "beam_splitter");
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix4d B;
    // clang-format off
    B << r, 0,  r,  0,
         0, r,  0,  r,
         r, 0, -r,  0,
         0, r,  0, -r;
    // clang-format on
    return GaussianState(state.layout(), B * state.mean(), B * state.cov() * B.transpose());
}

std::string_view to_string(HomodyneTarget target) noexcept
{
    switch (target) {
    case HomodyneTarget::mode1:
        return "mode-1";
    case HomodyneTarget::mode2:
        return "mode-2";
    case HomodyneTarget::bs_sum:
        return "bs-sum";
    case HomodyneTarget::bs_difference:
        return "bs-difference";
    }
    return "unknown";
}

std::vector<HomodyneSetting> required_settings()
{
    std::vector<HomodyneSetting> out;
    for (auto target : all_targets)
        for (double phase : lo_phases)
            out.push_back({target, phase});
    return out;
}

QuadratureMoments quadrature_moments(const GaussianState& state, HomodyneTarget target, double phase)
{
    require_two_modes(state, "quadrature_moments");
    std::optional<GaussianState> mixed;
    const GaussianState* source = &state;
    int mode = 0;
    switch (target) {
    case HomodyneTarget::mode1:
        mode = 0;
        break;
    case HomodyneTarget::mode2:
        mode = 1;
        break;
    case HomodyneTarget::bs_sum:
    case HomodyneTarget::bs_difference:
        mixed.emplace(beam_splitter(state));
        source = &*mixed;
        mode = target == HomodyneTarget::bs_sum ? 0 : 1;
        break;
    default:
        throw InvalidParameter("quadrature_moments: unknown homodyne target");
    }

    const double c = std::cos(phase), s = std::sin(phase);
    const auto& cov = source->cov();
    const auto& mean = source->mean();
    const int x = 2 * mode, p = 2 * mode + 1;

    QuadratureMoments out;
    out.mean = mean(x) * c + mean(p) * s;
    out.variance = 0.5 * (cov(x, x) * c * c + cov(p, p) * s * s + 2.0 * cov(x, p) * s * c);
    return out;
}

std::vector<double> sample_quadrature(const GaussianState& state, HomodyneTarget target, double phase,
                                      std::size_t count, std::uint64_t seed)
{
    if (count < 1)
        throw InvalidParameter("sample_quadrature: count must be >= 1");
    const QuadratureMoments m = quadrature_moments(state, target, phase);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(m.mean, std::sqrt(std::max(m.variance, 0.0)));
    std::vector<double> out(count);
    for (auto& v : out)
        v = normal(rng);
    return out;
}

std::uint64_t setting_seed(std::uint64_t seed, std::size_t index)
{
    return splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(index) + 1));
}

HomodyneRecord measure(const GaussianState& state, std::size_t samples_per_setting, std::uint64_t seed)
{
    if (samples_per_setting < 2)
        throw InvalidParameter("measure: need at least two samples per setting");
    HomodyneRecord record;
    record.seed = seed;
    record.settings = required_settings();
    for (std::size_t k = 0; k < record.settings.size(); ++k) {
        const auto& s = record.settings[k];
        record.samples.push_back(sample_quadrature(state, s.target, s.phase, samples_per_setting, setting_seed(seed, k)));
    }
    return record;
}

std::vector<VarianceEstimate> estimate_variances(const HomodyneRecord& record)
{
    if (record.samples.size() != record.settings.size())
        throw InvalidParameter("estimate_variances: settings and sample sets differ in number");
    std::vector<VarianceEstimate> out;
    for (std::size_t k = 0; k < record.settings.size(); ++k) {
        const auto& xs = record.samples[k];
        if (xs.size() < 2)
            throw InvalidParameter("estimate_variances: every setting needs at least two samples");
        double mean = 0.0;
        for (double x : xs)
            mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs)
            ss += (x - mean) * (x - mean);
        const double n = static_cast<double>(xs.size());
        const double var = ss / (n - 1.0);
        out.push_back({record.settings[k], var, var * std::sqrt(2.0 / (n - 1.0))});
    }
    return out;
}

std::vector<VarianceEstimate> analytic_variances(const GaussianState& state)
{
    std::vector<VarianceEstimate> out;
    for (const auto& s : required_settings())
        out.push_back({s, quadrature_moments(state, s.target, s.phase).variance, 0.0});
    return out;
}

ReconstructedState reconstruct_covariance(std::span<const VarianceEstimate> variances, const ReadoutChannel& channel)
{
    channel.validate();
    const VarianceTable tab = tabulate(variances);
    const auto& V = tab.value;
    const auto& E = tab.error;
    constexpr std::size_t p0 = 0, p45 = 1, p90 = 2;
    constexpr std::size_t plus = 2, minus = 3;

    ReconstructedState out;
    out.cov.setZero();
    out.std_error.setZero();

    for (std::size_t mode = 0; mode < 2; ++mode) {
        const auto& v = V[mode];
        const auto& e = E[mode];
        const int x = static_cast<int>(2 * mode), p = x + 1;
        out.cov(x, x) = 2.0 * v[p0];
        out.cov(p, p) = 2.0 * v[p90];
        out.cov(x, p) = out.cov(p, x) = 2.0 * v[p45] - v[p0] - v[p90];
        out.std_error(x, x) = 2.0 * e[p0];
        out.std_error(p, p) = 2.0 * e[p90];
        out.std_error(x, p) = out.std_error(p, x) =
            std::sqrt(4.0 * e[p45] * e[p45] + e[p0] * e[p0] + e[p90] * e[p90]);
    }

    auto sq = [](double a) { return a * a; };
    const double cxx = V[plus][p0] - V[minus][p0];
    const double cpp = V[plus][p90] - V[minus][p90];
    const double cxp_sum = 2.0 * (V[plus][p45] - V[minus][p45]) - cxx - cpp;
    out.cov(0, 2) = out.cov(2, 0) = cxx;
    out.cov(1, 3) = out.cov(3, 1) = cpp;
    out.cov(0, 3) = out.cov(3, 0) = out.cov(1, 2) = out.cov(2, 1) = 0.5 * cxp_sum;

    const double exx = std::sqrt(sq(E[plus][p0]) + sq(E[minus][p0]));
    const double epp = std::sqrt(sq(E[plus][p90]) + sq(E[minus][p90]));
    const double exp_half = 0.5 * std::sqrt(4.0 * sq(E[plus][p45]) + 4.0 * sq(E[minus][p45]) + sq(E[plus][p0]) +
                                            sq(E[minus][p0]) + sq(E[plus][p90]) + sq(E[minus][p90]));
    out.std_error(0, 2) = out.std_error(2, 0) = exx;
    out.std_error(1, 3) = out.std_error(3, 1) = epp;
    out.std_error(0, 3) = out.std_error(3, 0) = out.std_error(1, 2) = out.std_error(2, 1) = exp_half;

    if (channel.eta1 == 1.0 && channel.eta2 == 1.0)
        return out;

    const std::array<double, 2> eta{channel.eta1, channel.eta2};
    const double weakest = std::min(eta[0], eta[1]);
    if (!(weakest > 0.0) || 1.0 / weakest > max_channel_amplification)
        throw NumericalError(fmt::format("reconstruct_covariance: efficiency {} amplifies noise by more than {}x; "
                                         "bias correction refused",
                                         weakest, max_channel_amplification));

    for (int mode = 0; mode < 2; ++mode) {
        const double e = eta[static_cast<std::size_t>(mode)];
        auto block = out.cov.block<2, 2>(2 * mode, 2 * mode);
        block = (block - (1.0 - e) * Eigen::Matrix2d::Identity()) / e;
        out.std_error.block<2, 2>(2 * mode, 2 * mode) /= e;
    }
    const double cross = std::sqrt(eta[0] * eta[1]);
    out.cov.block<2, 2>(0, 2) /= cross;
    out.cov.block<2, 2>(2, 0) /= cross;
    out.std_error.block<2, 2>(0, 2) /= cross;
    out.std_error.block<2, 2>(2, 0) /= cross;
    out.bias_corrected = true;
    return out;
}

ReconstructedState reconstruct_covariance(const HomodyneRecord& record, const ReadoutChannel& channel)
{
    const auto variances = estimate_variances(record);
    return reconstruct_covariance(variances, channel);
}

const ModeLayout& readout_layout()
{
    static const ModeLayout layout({"mode-1", "mode-2"});
    return layout;
}

EntanglementEstimate estimate_entanglement(std::span<const VarianceEstimate> variances,
                                           const ReadoutChannel& channel, std::size_t draws, std::uint64_t seed)
{
    const Partition partition{{"mode-1"}, {"mode-2"}};
    auto evaluate = [&](std::span<const VarianceEstimate> v) {
        const ReconstructedState r = reconstruct_covariance(v, channel);
        const GaussianState state(readout_layout(), Eigen::VectorXd::Zero(4), r.cov);
        return log_negativity(state, partition);
    };

    const EntanglementResult point = evaluate(variances);
    EntanglementEstimate out;
    out.log_negativity = point.log_negativity;
    out.min_pt_eigenvalue = point.pt_spectrum.front();
    if (draws < 2)
        return out;

    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<VarianceEstimate> perturbed(variances.begin(), variances.end());
    double sum_ln = 0.0, sum_ln2 = 0.0, sum_g = 0.0, sum_g2 = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < draws; ++k) {
        for (std::size_t i = 0; i < perturbed.size(); ++i)
            perturbed[i].variance = variances[i].variance + variances[i].std_error * normal(rng);
        try {
            const EntanglementResult r = evaluate(perturbed);
            sum_ln += r.log_negativity;
            sum_ln2 += r.log_negativity * r.log_negativity;
            sum_g += r.pt_spectrum.front();
            sum_g2 += r.pt_spectrum.front() * r.pt_spectrum.front();
            ++used;
        } catch (const NumericalDegeneracy&) {
            // A redraw far outside the physical region; excluded from the spread.
        }
    }
    if (used < draws / 2 + 1)
        throw NumericalError("estimate_entanglement: most redraws produced degenerate spectra");
    const double n = static_cast<double>(used);
    auto spread = [n](double s, double s2) { return std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0))); };
    out.log_negativity_std_error = spread(sum_ln, sum_ln2);
    out.min_pt_std_error = spread(sum_g, sum_g2);
    return out;
}

} // namespace vacent
