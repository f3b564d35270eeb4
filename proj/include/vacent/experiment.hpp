#ifndef VACENT_EXPERIMENT_HPP
#define VACENT_EXPERIMENT_HPP

#include "vacent/dicke_model.hpp"
#include "vacent/dynamics.hpp"
#include "vacent/entanglement.hpp"
#include "vacent/errors.hpp"
#include "vacent/exact_oracle.hpp"
#include "vacent/homodyne.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vacent {

class ConfigError : public Error
{
public:
    using Error::Error;
};

enum class ExperimentKind { entanglement, oracle, readout };

std::string_view to_string(ExperimentKind kind) noexcept;

struct TimeGridSpec
{
    double start = 0.0;
    double stop = 0.1;
    int points = 2001;

    std::vector<double> values() const { return uniform_grid(start, stop, points); }
};

/// Parameters that may be swept: omega, omega0, g, N, N1, N2, phi, nbar_ensembles, nbar_cavity.
struct SweepAxis
{
    std::string parameter;
    std::vector<double> values;
};

struct OracleConfig
{
    OracleLadderOptions ladder;
    // Vacuum-entanglement scan of the exact model.
    int scan_N = 1;
    double scan_omega_factor = 1.06;  ///< omega = omega0 = factor * 2 sqrt(2) g sqrt(N)
    double scan_stop = 0.05;
    int scan_points = 51;
    int scan_cutoff = 20;
};

struct ReadoutConfig
{
    ReadoutChannel channel{0.8, 0.8};
    std::size_t samples_per_setting = 100000;
    std::size_t error_draws = 400;
};

struct OutputPaths
{
    std::string csv;
    std::string svg;
    std::string summary;
};

/**
  One experiment. `resonant` ties omega0 to omega, including along an omega
  sweep. JSON schema and defaults are documented in README.md.
*/
struct ExperimentConfig
{
    std::string name = "experiment";
    ExperimentKind kind = ExperimentKind::entanglement;
    PhysicalParams params;
    bool resonant = true;
    TimeGridSpec grid;
    std::optional<SweepAxis> sweep;
    PropagatorSource propagator = PropagatorSource::normal_mode;
    OutputPaths outputs;
    std::uint64_t seed = 1;
    OracleConfig oracle;
    ReadoutConfig readout;

    /// Default file names fill in empty output paths.
    OutputPaths resolved_outputs() const;
};

/// Throws ConfigError with line/column or key-path diagnostics. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

std::vector<std::string> preset_names();
ExperimentConfig preset_config(std::string_view name);

/// Physical parameters of every sweep point; a single point without a sweep.
std::vector<PhysicalParams> sweep_points(const ExperimentConfig& config);
std::string curve_id(const ExperimentConfig& config, std::size_t index);

/// Builds every sweep point's Hamiltonian; rethrows UnstableRegime naming the offending point.
void check_stability(const ExperimentConfig& config);

struct Curve
{
    std::string id;
    PhysicalParams params;
    EntanglementSeries series;
    std::optional<Peak> peak;
    std::optional<double> onset;
    double max_log_negativity = 0.0;
    double t_at_max = 0.0;
    double max_symplectic_residual = 0.0;
};

struct SweepResult
{
    ExperimentConfig config;
    std::vector<Curve> curves;
};

/// Reference window for the first-peak time t* (units of 1/g).
inline constexpr double t_star_window_low = 1e-3;
inline constexpr double t_star_window_high = 5e-2;

SweepResult run_entanglement(const ExperimentConfig& config);
void write_csv(std::ostream& out, const SweepResult& result);
void write_svg(std::ostream& out, const SweepResult& result);
nlohmann::ordered_json summary_json(const SweepResult& result);

struct OracleReport
{
    ExperimentConfig config;
    OracleLadderResult ladder;
    PhysicalParams scan_params;
    NegativityScan scan;
};

OracleReport run_oracle(const ExperimentConfig& config);
void write_csv(std::ostream& out, const OracleReport& report);
void write_scan_csv(std::ostream& out, const OracleReport& report);
void write_svg(std::ostream& out, const OracleReport& report);
nlohmann::ordered_json summary_json(const OracleReport& report);

struct ReadoutReport
{
    ExperimentConfig config;
    double peak_time = 0.0;
    GaussianState true_state;       ///< two-mode, dimensionless, before the channel
    ReconstructedState reconstruction;
    EntanglementEstimate estimate;
    double true_log_negativity = 0.0;
    double true_min_pt_eigenvalue = 1.0;
};

ReadoutReport run_readout(const ExperimentConfig& config);
void write_csv(std::ostream& out, const ReadoutReport& report);
void write_svg(std::ostream& out, const ReadoutReport& report);
nlohmann::ordered_json summary_json(const ReadoutReport& report);

enum class OutputFormat { csv, svg, both };
OutputFormat parse_output_format(std::string_view name);

/// Runs `config` and writes its artifacts to `out_dir`. Returns the files written.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                                  OutputFormat format);

} // namespace vacent

#endif
