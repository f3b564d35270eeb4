#include "vacent/dicke_model.hpp"
#include "vacent/errors.hpp"
#include "vacent/exact_oracle.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

using namespace vacent;
using cd = std::complex<double>;

namespace {

PhysicalParams small(double omega, double omega0, double g = 1.0, double phi = 0.0)
{
    PhysicalParams p;
    p.omega = omega;
    p.omega0 = omega0;
    p.g = g;
    p.phi = phi;
    return p;
}

// Reference propagation by dense diagonalization.
Eigen::VectorXcd dense_evolve(const SparseHamiltonian& H, const Eigen::VectorXcd& psi, double t)
{
    const Eigen::MatrixXd dense = H;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<cd>() * cd(0.0, -t)).array().exp().matrix();
    const Eigen::MatrixXcd U = es.eigenvectors().cast<cd>();
    return U * phases.asDiagonal() * (U.adjoint() * psi);
}

} // namespace

TEST_CASE("truncated space")
{
    const TruncatedSpace s(2, 3, 4);
    CHECK(s.spin_dim(1) == 3);
    CHECK(s.spin_dim(2) == 4);
    CHECK(s.fock_dim() == 5);
    CHECK(s.dim() == 60);
    CHECK(s.index(0, 0, 0) == 0);
    CHECK(s.index(0, 0, 4) == 4);
    CHECK(s.index(0, 1, 0) == 5);
    CHECK(s.index(1, 0, 0) == 20);
    CHECK(s.index(2, 3, 4) == 59);
    CHECK(s.m_value(1, 0) == -1.0);
    CHECK(s.m_value(2, 3) == 1.5);
    CHECK_THROWS_AS(TruncatedSpace(0, 1, 2), InvalidParameter);
    CHECK_THROWS_AS(TruncatedSpace(1, 1, -1), InvalidParameter);
    CHECK_THROWS_AS(TruncatedSpace(400, 400, 10), InvalidParameter);
}

TEST_CASE("decoupled Hamiltonian is diagonal")
{
    const TruncatedSpace s(2, 3, 5);
    const auto p = small(3.0, 2.0, 0.0);
    const Eigen::MatrixXd H(build_exact_hamiltonian(p, s));
    for (int k1 = 0; k1 <= 2; ++k1)
        for (int k2 = 0; k2 <= 3; ++k2)
            for (int n = 0; n <= 5; ++n) {
                const auto i = static_cast<Eigen::Index>(s.index(k1, k2, n));
                CHECK(H(i, i) == doctest::Approx(2.0 * n + 3.0 * (s.m_value(1, k1) + s.m_value(2, k2))));
            }
    CHECK((H - Eigen::MatrixXd(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hand-built Hamiltonian for two qubits and one photon")
{
    const TruncatedSpace s(1, 1, 1);
    const double w = 1.3, w0 = 0.7, g = 0.4, phi = 0.6;
    const Eigen::MatrixXd H(build_exact_hamiltonian(small(w, w0, g, phi), s));
    REQUIRE(H.rows() == 8);

    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(8, 8);
    const double g2 = g * std::cos(phi);
    for (int k1 = 0; k1 <= 1; ++k1)
        for (int k2 = 0; k2 <= 1; ++k2)
            for (int n = 0; n <= 1; ++n) {
                const int i = 4 * k1 + 2 * k2 + n;
                expect(i, i) = w0 * n + w * ((k1 - 0.5) + (k2 - 0.5));
                // (a + a^dag)(J+ + J-) flips the spin and changes n by one; all matrix elements are 1 here.
                expect(i, 4 * (1 - k1) + 2 * k2 + (1 - n)) = g;
                expect(i, 4 * k1 + 2 * (1 - k2) + (1 - n)) = g2;
            }
    CHECK((H - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Hamiltonian is symmetric and keeps every coupling product")
{
    const TruncatedSpace s(3, 2, 6);
    const Eigen::MatrixXd H(build_exact_hamiltonian(small(2.0, 1.5, 0.3, 0.2), s));
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // Counter-rotating a^dag J+ connects |k1=0, n=0> with |k1=1, n=1>.
    const double j = 1.5, m = -1.5;
    CHECK(H(static_cast<Eigen::Index>(s.index(0, 0, 0)), static_cast<Eigen::Index>(s.index(1, 0, 1))) ==
          doctest::Approx(0.3 * std::sqrt(j * (j + 1) - m * (m + 1))));
    // a J+ connects |k1=0, n=1> with |k1=1, n=0>.
    CHECK(H(static_cast<Eigen::Index>(s.index(0, 0, 1)), static_cast<Eigen::Index>(s.index(1, 0, 0))) ==
          doctest::Approx(0.3 * std::sqrt(3.0)));
}

TEST_CASE("Lanczos propagation")
{
    const TruncatedSpace s(2, 2, 8);
    const auto p = small(2.998, 2.998);
    const auto H = build_exact_hamiltonian(p, s);
    const auto psi0 = decoupled_ground_state(s);
    CHECK(psi0.amplitudes.norm() == doctest::Approx(1.0));
    CHECK(std::abs(psi0.amplitudes(0)) == 1.0);

    SUBCASE("t = 0")
    {
        const auto psi = evolve_exact(H, psi0, 0.0);
        CHECK((psi.amplitudes - psi0.amplitudes).norm() == 0.0);
    }
    SUBCASE("matches dense propagation")
    {
        for (double t : {0.01, 0.3, 2.5}) {
            const auto psi = evolve_exact(H, psi0, t);
            CHECK(psi.t == t);
            CHECK((psi.amplitudes - dense_evolve(H, psi0.amplitudes, t)).norm() < 1e-10);
            CHECK(psi.amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(exact_energy(H, psi) == doctest::Approx(exact_energy(H, psi0)).epsilon(1e-10));
        }
    }
    SUBCASE("decoupled evolution is a global phase")
    {
        const auto H0 = build_exact_hamiltonian(small(2.0, 1.0, 0.0), s);
        const auto psi = evolve_exact(H0, psi0, 1.7);
        CHECK(std::abs(psi.amplitudes(0)) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::arg(psi.amplitudes(0)) == doctest::Approx(std::arg(std::exp(cd(0, 1.7 * 2.0 * 2.0)))));
        const auto m0 = exact_moments(psi0, s, small(2.0, 1.0, 0.0));
        const auto m1 = exact_moments(psi, s, small(2.0, 1.0, 0.0));
        CHECK((m1.quadrature_cov - m0.quadrature_cov).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("invalid input")
    {
        CHECK_THROWS_AS(evolve_exact(H, psi0, -1.0), InvalidParameter);
        ExactState wrong{Eigen::VectorXcd::Zero(3), 0.0};
        CHECK_THROWS_AS(evolve_exact(H, wrong, 1.0), InvalidParameter);
    }
}

TEST_CASE("ground state moments")
{
    for (int N : {1, 2, 5}) {
        const TruncatedSpace s(N, N, 3);
        const auto p = small(4.0, 2.5);
        const auto m = exact_moments(decoupled_ground_state(s), s, p);
        CHECK(m.spin_mean[0](2) == doctest::Approx(-N / 2.0));
        CHECK(m.spin_mean[1](2) == doctest::Approx(-N / 2.0));
        CHECK(m.spin_second(0, 0) == doctest::Approx(N / 4.0));
        CHECK(m.spin_second(1, 1) == doctest::Approx(N / 4.0));
        CHECK(m.spin_second(0, 2) == doctest::Approx(0.0));
        CHECK(m.photon_second(0, 0) == doctest::Approx(1.0 / (2 * 2.5)));
        CHECK(m.quadrature_cov(0, 0) == doctest::Approx(1.0 / 4.0));
        CHECK(m.quadrature_cov(1, 1) == doctest::Approx(4.0));
        CHECK(m.quadrature_cov(4, 4) == doctest::Approx(1.0 / 2.5));
        CHECK(m.quadrature_cov(5, 5) == doctest::Approx(2.5));
        CHECK(m.quadrature_mean.norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("counter-rotating coupling correlates the ensembles")
{
    const int N = 2;
    const double w = 1.06 * critical_omega_resonant(1.0, N);
    const TruncatedSpace s(N, N, 20);
    const auto p = small(w, w);
    const auto psi = evolve_exact(build_exact_hamiltonian(p, s), decoupled_ground_state(s), 0.01);
    const auto m = exact_moments(psi, s, p);
    CHECK(std::abs(m.spin_second(0, 2)) > 1e-8);
    const auto p0 = small(w, w, 0.0);
    const auto psi0 = evolve_exact(build_exact_hamiltonian(p0, s), decoupled_ground_state(s), 0.01);
    CHECK(std::abs(exact_moments(psi0, s, p0).spin_second(0, 2)) < 1e-14);
    CHECK(m.spin_mean[0](2) > -1.0);
}

TEST_CASE("exact log negativity")
{
    SUBCASE("Bell state")
    {
        const TruncatedSpace s(1, 1, 2);
        ExactState psi{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.dim())), 0.0};
        psi.amplitudes(static_cast<Eigen::Index>(s.index(0, 0, 1))) = 1.0 / std::sqrt(2.0);
        psi.amplitudes(static_cast<Eigen::Index>(s.index(1, 1, 1))) = 1.0 / std::sqrt(2.0);
        CHECK(exact_log_negativity(psi, s) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("mixed by the photon")
    {
        // (|00>|0> + |11>|1>)/sqrt(2): the spins alone are classically correlated.
        const TruncatedSpace s(1, 1, 1);
        ExactState psi{Eigen::VectorXcd::Zero(8), 0.0};
        psi.amplitudes(static_cast<Eigen::Index>(s.index(0, 0, 0))) = 1.0 / std::sqrt(2.0);
        psi.amplitudes(static_cast<Eigen::Index>(s.index(1, 1, 1))) = 1.0 / std::sqrt(2.0);
        CHECK(exact_log_negativity(psi, s) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("product and decoupled states")
    {
        const TruncatedSpace s(2, 3, 4);
        const auto psi0 = decoupled_ground_state(s);
        CHECK(exact_log_negativity(psi0, s) == doctest::Approx(0.0).epsilon(1e-12));
        const auto H0 = build_exact_hamiltonian(small(1.0, 1.0, 0.0), s);
        CHECK(exact_log_negativity(evolve_exact(H0, psi0, 0.8), s) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("dimension cap")
    {
        const TruncatedSpace s(10, 10, 0);
        CHECK_THROWS_AS(exact_log_negativity(decoupled_ground_state(s), s), InvalidParameter);
    }
}

TEST_CASE("ground state energy")
{
    for (int N : {1, 2, 3}) {
        const TruncatedSpace s(N, N, 12);
        const double w = 1.06 * critical_omega_resonant(1.0, N);
        const auto H = build_exact_hamiltonian(small(w, w), s);
        const double e = ground_state_energy(H);
        CHECK(e < -N * w);
        CHECK(e <= exact_energy(H, decoupled_ground_state(s)));
    }
    CHECK_THROWS_AS(ground_state_energy(build_exact_hamiltonian(small(1, 1), TruncatedSpace(10, 10, 30))),
                    InvalidParameter);
}

TEST_CASE("adaptive cutoff")
{
    PhysicalParams p = small(4.0, 4.0, 0.5);
    p.N1 = p.N2 = 2;
    const auto run = run_exact(p, 0.5);
    CHECK(run.converged);
    CHECK(run.cutoff_change < 1e-6);
    CHECK(run.energy_drift < 1e-10);
    CHECK(run.space.N1() == 2);

    CutoffPolicy tight;
    tight.initial_cutoff = 1;
    tight.max_cutoff = 2;
    tight.tolerance = 1e-14;
    const auto capped = run_exact(p, 0.5, tight);
    CHECK_FALSE(capped.converged);
    CHECK(capped.space.photon_cutoff() == 2);
}

TEST_CASE("oracle ladder")
{
    const auto result = oracle_convergence(OracleLadderOptions{});
    REQUIRE(result.points.size() == 3);
    CHECK(result.omega == doctest::Approx(4.0 / 0.94));
    CHECK(result.monotone_decreasing());
    CHECK(result.all_converged());
    for (const auto& pt : result.points)
        CHECK(pt.max_deviation < 1e-2);
    // The deviation roughly halves when N doubles.
    CHECK(result.points[1].max_deviation / result.points[0].max_deviation == doctest::Approx(0.5).epsilon(0.05));

    OracleLadderOptions bad;
    bad.coupling_fraction = 1.2;
    CHECK_THROWS_AS(oracle_convergence(bad), InvalidParameter);
    bad = OracleLadderOptions{};
    bad.ladder.clear();
    CHECK_THROWS_AS(oracle_convergence(bad), InvalidParameter);
}

TEST_CASE("negativity scan")
{
    PhysicalParams p = small(3.0, 3.0);
    p.N1 = p.N2 = 1;
    const std::vector<double> grid{0.0, 0.1, 0.2, 0.4};
    const auto scan = exact_negativity_scan(p, 12, grid);
    REQUIRE(scan.values.size() == 4);
    CHECK(scan.values[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(scan.max_value > 0.0);
    // Sequential propagation agrees with a direct run to the last time.
    const TruncatedSpace s(1, 1, 12);
    const auto direct = evolve_exact(build_exact_hamiltonian(p, s), decoupled_ground_state(s), 0.4);
    CHECK(scan.values[3] == doctest::Approx(exact_log_negativity(direct, s)).epsilon(1e-9));
    const std::vector<double> unsorted{0.2, 0.1};
    CHECK_THROWS_AS(exact_negativity_scan(p, 12, unsorted), InvalidParameter);
}
