#include "vacent/entanglement.hpp"

#include "vacent/errors.hpp"

#include <algorithm>
#include <cmath>

namespace vacent {

Partition ensemble_partition()
{
    return Partition{{ensemble1_label}, {ensemble2_label}};
}

double log_negativity_from_spectrum(std::span<const double> pt_spectrum)
{
    double sum = 0.0;
    for (double gamma : pt_spectrum)
        if (gamma < 1.0)
            sum -= std::log2(std::abs(gamma));
    return sum;
}

EntanglementResult log_negativity(const GaussianState& state, const Partition& partition)
{
    if (partition.a.empty() || partition.b.empty())
        throw InvalidParameter("log_negativity: both sides of the partition must be non-empty");
    for (const auto& label : partition.a)
        if (std::find(partition.b.begin(), partition.b.end(), label) != partition.b.end())
            throw InvalidParameter("log_negativity: mode '" + label + "' appears on both sides");

    std::vector<std::string> keep = partition.a;
    keep.insert(keep.end(), partition.b.begin(), partition.b.end());
    const GaussianState reduced = partial_trace(state, keep);

    GaussianState transposed = reduced;
    for (const auto& label : partition.b)
        transposed = partial_transpose(transposed, label);

    EntanglementResult out;
    out.pt_spectrum = symplectic_eigenvalues(transposed.cov());
    out.log_negativity = log_negativity_from_spectrum(out.pt_spectrum);
    out.reduced_purity = 1.0 / std::sqrt(reduced.cov().determinant());
    return out;
}

std::vector<double> EntanglementSeries::log_negativities() const
{
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values)
        out.push_back(v.log_negativity);
    return out;
}

EntanglementSeries entanglement_trajectory(const QuadraticHamiltonian& H, const GaussianState& state0,
                                           std::span<const double> t_grid, PropagatorSource source)
{
    const Trajectory traj = trajectory(H, state0, t_grid, source);
    const Partition partition = ensemble_partition();

    EntanglementSeries out;
    out.times = traj.times;
    out.symplectic_residuals = traj.symplectic_residuals;
    out.values.reserve(traj.states.size());
    for (const auto& state : traj.states)
        out.values.push_back(log_negativity(state, partition));
    out.hp = hp_validity(traj.states, H.params());
    return out;
}

std::optional<Peak> first_peak(std::span<const double> times, std::span<const double> values, double floor)
{
    if (times.size() != values.size())
        throw InvalidParameter("first_peak: times and values differ in length");
    if (values.empty())
        throw InvalidParameter("first_peak: empty series");

    for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        const double y0 = values[k - 1], y1 = values[k], y2 = values[k + 1];
        if (!(y1 > floor && y1 >= y0 && y1 > y2))
            continue;

        // Vertex of the interpolating parabola through the three points.
        const double t0 = times[k - 1], t1 = times[k], t2 = times[k + 1];
        const double d01 = (y1 - y0) / (t1 - t0);
        const double d12 = (y2 - y1) / (t2 - t1);
        const double curvature = (d12 - d01) / (t2 - t0);
        Peak peak{t1, y1, k};
        if (curvature < 0.0) {
            const double slope_mid = d01 + curvature * (t1 - t0);  // derivative at t1
            const double shift = -slope_mid / (2.0 * curvature);
            peak.t = t1 + shift;
            peak.value = y1 + slope_mid * shift + curvature * shift * shift;
        }
        return peak;
    }
    return std::nullopt;
}

std::optional<double> onset_time(std::span<const double> times, std::span<const double> values, double floor)
{
    if (times.size() != values.size())
        throw InvalidParameter("onset_time: times and values differ in length");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (values[k] > floor)
            return times[k];
    return std::nullopt;
}

} // namespace vacent
