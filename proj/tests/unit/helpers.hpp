#ifndef VACENT_TESTS_HELPERS_HPP
#define VACENT_TESTS_HELPERS_HPP

#include "vacent/dicke_model.hpp"
#include "vacent/dynamics.hpp"
#include "vacent/symplectic.hpp"

#include <Eigen/Dense>

#include <random>

namespace testing {

inline double max_abs(const Eigen::MatrixXd& m)
{
    return m.cwiseAbs().maxCoeff();
}

// Local squeeze of every mode by a random factor.
inline Eigen::MatrixXd random_local_squeeze(std::size_t n_modes, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> log_s(-1.5, 1.5);
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double s = std::exp(log_s(rng));
        S(2 * k, 2 * k) = s;
        S(2 * k + 1, 2 * k + 1) = 1.0 / s;
    }
    return S;
}

// Three-mode symplectic matrix: squeeze * propagator of a random stable Hamiltonian * squeeze.
inline Eigen::MatrixXd random_symplectic3(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    vacent::PhysicalParams p;
    p.omega = 1.0 + 3.0 * u(rng);
    p.omega0 = 1.0 + 3.0 * u(rng);
    p.N1 = 1 + static_cast<std::int64_t>(5 * u(rng));
    p.N2 = 1 + static_cast<std::int64_t>(5 * u(rng));
    p.phi = 3.0 * u(rng);
    p.g = 0.9 * u(rng) * vacent::critical_coupling(p);
    const auto H = vacent::build_hamiltonian(p);
    const Eigen::MatrixXd S = vacent::propagator_normal_mode(H, 0.3 + 2.0 * u(rng)).S;
    return random_local_squeeze(3, rng) * S * random_local_squeeze(3, rng);
}

} // namespace testing

#endif
