#ifndef VACENT_TESTS_GOLDEN_HPP
#define VACENT_TESTS_GOLDEN_HPP

// Frozen reference values from tests/oracles/gaussian_reference.py
// (40-digit mpmath propagator). N = 1e4, omega = omega0, vacuum start unless
// noted, grid gt in [0, 0.1] with 2001 points.

namespace golden {

inline constexpr double t_star_300 = 0.00691945635590097;
inline constexpr double logneg_at_t_star_300 = 0.413997365580353;  // parabola estimate
inline constexpr double logneg_value_at_t_star_300 = 0.41399756433710343;  // evaluated at t_star_300
inline constexpr double t_star_500 = 0.00507666326375768;
inline constexpr double t_star_2000 = 0.00155818004543765;
inline constexpr double logneg_300_at_0005 = 0.22980592966185084;

inline constexpr double max_logneg_300 = 0.4598368887;
inline constexpr double max_logneg_500 = 0.2395811021;
inline constexpr double max_logneg_2000 = 0.0528961530;

// omega = 300, ensembles thermal at nbar, cavity in vacuum.
inline constexpr double max_logneg_nbar[4] = {0.4598368887, 0.3576134390, 0.2662488042, 0.1081437201};
inline constexpr double onset_nbar[4] = {0.0012, 0.00425, 0.0051, 0.0063};

} // namespace golden

#endif
