#ifndef VACENT_HOMODYNE_HPP
#define VACENT_HOMODYNE_HPP

#include "vacent/symplectic.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vacent {

/// Output field sqrt(eta) c + sqrt(1 - eta) vacuum for each ensemble.
struct ReadoutChannel
{
    double eta1 = 1.0;
    double eta2 = 1.0;

    void validate() const;
};

/**
  Rescales each mode to dimensionless quadratures x' = sqrt(nu) x,
  p' = p / sqrt(nu), so the vacuum covariance becomes the identity. This is
  a local symplectic map and does not change any entanglement measure.
*/
GaussianState to_readout_units(const GaussianState& state, std::span<const double> freqs);

/// Mixes each (dimensionless) mode with vacuum: block -> eta block + (1 - eta) I.
GaussianState apply_readout_channel(const GaussianState& state, const ReadoutChannel& channel);

/// 50:50 beam splitter on a two-mode state: x_+- = (x_1 +- x_2)/sqrt(2), same for p.
GaussianState beam_splitter(const GaussianState& state);

enum class HomodyneTarget { mode1, mode2, bs_sum, bs_difference };

std::string_view to_string(HomodyneTarget target) noexcept;

struct HomodyneSetting
{
    HomodyneTarget target;
    double phase;  ///< local-oscillator phase
};

/// The 12 settings needed for reconstruction: every target at LO phases 0, pi/4, pi/2.
std::vector<HomodyneSetting> required_settings();

/// Mean and variance of X_phi = x cos(phi) + p sin(phi) on a target port.
struct QuadratureMoments
{
    double mean = 0.0;
    double variance = 0.0;
};

QuadratureMoments quadrature_moments(const GaussianState& state, HomodyneTarget target, double phase);

/// i.i.d. normal draws of X_phi. Reproducible for a given seed.
std::vector<double> sample_quadrature(const GaussianState& state, HomodyneTarget target, double phase,
                                      std::size_t count, std::uint64_t seed);

struct HomodyneRecord
{
    std::vector<HomodyneSetting> settings;
    std::vector<std::vector<double>> samples;  ///< one vector per setting
    std::uint64_t seed = 0;
};

/// Seed for setting `index`, derived from the record seed so sampling order does not matter.
std::uint64_t setting_seed(std::uint64_t seed, std::size_t index);

/// Samples every required setting of a two-mode dimensionless state.
HomodyneRecord measure(const GaussianState& state, std::size_t samples_per_setting, std::uint64_t seed);

/// Per-setting variance estimate with its sampling standard error.
struct VarianceEstimate
{
    HomodyneSetting setting;
    double variance = 0.0;
    double std_error = 0.0;
};

/// Mean-subtracted unbiased sample variances; standard error v sqrt(2 / (n - 1)).
std::vector<VarianceEstimate> estimate_variances(const HomodyneRecord& record);

/// Exact variances of every required setting, zero standard error.
std::vector<VarianceEstimate> analytic_variances(const GaussianState& state);

struct ReconstructedState
{
    Eigen::Matrix4d cov;
    Eigen::Matrix4d std_error;
    bool bias_corrected = false;
};

/// Largest 1/eta the bias correction will amplify by before refusing.
inline constexpr double max_channel_amplification = 100.0;

/**
  Local blocks from the single-mode ports, cross block from the beam-splitter
  ports: sigma_x1x2 = V_+(0) - V_-(0), sigma_p1p2 = V_+(pi/2) - V_-(pi/2), and
  sigma_x1p2 + sigma_p1x2 = 2 [V_+(pi/4) - V_-(pi/4)] - sigma_x1x2 - sigma_p1p2,
  split evenly between the two entries (exact for exchange-symmetric
  ensembles). When `channel` is not the identity the known vacuum admixture
  is removed: local blocks (S - (1 - eta) I) / eta, cross block / sqrt(eta1 eta2).
*/
ReconstructedState reconstruct_covariance(std::span<const VarianceEstimate> variances,
                                          const ReadoutChannel& channel);
ReconstructedState reconstruct_covariance(const HomodyneRecord& record, const ReadoutChannel& channel);

/// Layout used for reconstructed two-mode states.
const ModeLayout& readout_layout();

struct EntanglementEstimate
{
    double log_negativity = 0.0;
    double log_negativity_std_error = 0.0;
    double min_pt_eigenvalue = 0.0;
    double min_pt_std_error = 0.0;

    /// 1 - min gamma exceeds `sigmas` standard errors.
    bool verified(double sigmas = 3.0) const { return 1.0 - min_pt_eigenvalue > sigmas * min_pt_std_error; }
};

/**
  Log-negativity of the reconstruction with standard errors propagated by
  redrawing every measured variance from its sampling distribution and
  repeating the reconstruction `draws` times.
*/
EntanglementEstimate estimate_entanglement(std::span<const VarianceEstimate> variances,
                                           const ReadoutChannel& channel, std::size_t draws,
                                           std::uint64_t seed);

} // namespace vacent

#endif
