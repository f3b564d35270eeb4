#ifndef VACENT_ENTANGLEMENT_HPP
#define VACENT_ENTANGLEMENT_HPP

#include "vacent/dicke_model.hpp"
#include "vacent/dynamics.hpp"
#include "vacent/symplectic.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vacent {

struct EntanglementResult
{
    double log_negativity = 0.0;             ///< bits
    std::vector<double> pt_spectrum;         ///< partially transposed symplectic eigenvalues, ascending
    double reduced_purity = 1.0;             ///< 1 / sqrt(det cov) of the A+B marginal
};

struct Partition
{
    std::vector<std::string> a;
    std::vector<std::string> b;
};

/// The two ensembles, with everything else traced out.
Partition ensemble_partition();

/// -sum_j log2 min(1, gamma_j).
double log_negativity_from_spectrum(std::span<const double> pt_spectrum);

/// Restricts to A+B, flips the momenta of B, then applies the Gaussian negativity formula.
EntanglementResult log_negativity(const GaussianState& state, const Partition& partition);

struct EntanglementSeries
{
    std::vector<double> times;
    std::vector<EntanglementResult> values;
    std::vector<double> symplectic_residuals;
    HpValidityReport hp;

    std::vector<double> log_negativities() const;
};

EntanglementSeries entanglement_trajectory(const QuadraticHamiltonian& H, const GaussianState& state0,
                                           std::span<const double> t_grid,
                                           PropagatorSource source = PropagatorSource::normal_mode);

inline constexpr double entanglement_floor = 1e-3;

struct Peak
{
    double t = 0.0;
    double value = 0.0;
    std::size_t index = 0;  ///< grid index of the bracketing maximum
};

/**
  First local maximum above `floor`, refined with a parabola through the
  three bracketing grid points. A maximum on the last grid point does not
  count since the series may still be rising.
*/
std::optional<Peak> first_peak(std::span<const double> times, std::span<const double> values,
                               double floor = entanglement_floor);

/// First grid time whose value exceeds `floor`.
std::optional<double> onset_time(std::span<const double> times, std::span<const double> values,
                                 double floor = entanglement_floor);

} // namespace vacent

#endif
