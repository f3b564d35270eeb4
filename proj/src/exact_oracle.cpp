#include "vacent/exact_oracle.hpp"

#include "vacent/dynamics.hpp"
#include "vacent/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace vacent {

namespace {

using cplx = std::complex<double>;
using Triplet = Eigen::Triplet<double>;

double ladder_coefficient(double j, double m)
{
    // <j, m+1 | J_+ | j, m>
    return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
}

enum class Primitive { spin_raise_1, spin_z_1, spin_raise_2, spin_z_2, annihilate };

SparseOperator primitive_operator(const TruncatedSpace& space, Primitive which)
{
    const int d1 = static_cast<int>(space.spin_dim(1));
    const int d2 = static_cast<int>(space.spin_dim(2));
    const int nf = static_cast<int>(space.fock_dim());
    const double j1 = 0.5 * space.N1();
    const double j2 = 0.5 * space.N2();

    std::vector<Eigen::Triplet<cplx>> entries;
    for (int k1 = 0; k1 < d1; ++k1)
        for (int k2 = 0; k2 < d2; ++k2)
            for (int n = 0; n < nf; ++n) {
                const auto col = static_cast<Eigen::Index>(space.index(k1, k2, n));
                switch (which) {
                case Primitive::spin_raise_1:
                    if (k1 + 1 < d1)
                        entries.emplace_back(space.index(k1 + 1, k2, n), col,
                                             ladder_coefficient(j1, space.m_value(1, k1)));
                    break;
                case Primitive::spin_raise_2:
                    if (k2 + 1 < d2)
                        entries.emplace_back(space.index(k1, k2 + 1, n), col,
                                             ladder_coefficient(j2, space.m_value(2, k2)));
                    break;
                case Primitive::spin_z_1:
                    entries.emplace_back(col, col, space.m_value(1, k1));
                    break;
                case Primitive::spin_z_2:
                    entries.emplace_back(col, col, space.m_value(2, k2));
                    break;
                case Primitive::annihilate:
                    if (n > 0)
                        entries.emplace_back(space.index(k1, k2, n - 1), col, std::sqrt(static_cast<double>(n)));
                    break;
                }
            }

    const auto dim = static_cast<Eigen::Index>(space.dim());
    SparseOperator op(dim, dim);
    op.setFromTriplets(entries.begin(), entries.end());
    return op;
}

SparseOperator adjoint(const SparseOperator& op)
{
    return SparseOperator(op.adjoint());
}

double max_abs_row_sum(const SparseHamiltonian& H)
{
    double best = 0.0;
    for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
        double sum = 0.0;
        for (SparseHamiltonian::InnerIterator it(H, r); it; ++it)
            sum += std::abs(it.value());
        best = std::max(best, sum);
    }
    return best;
}

} // namespace

TruncatedSpace::TruncatedSpace(int N1, int N2, int photon_cutoff) : N1_(N1), N2_(N2), cutoff_(photon_cutoff)
{
    if (N1 < 1 || N2 < 1)
        throw InvalidParameter("truncated space: molecule counts must be >= 1");
    if (photon_cutoff < 0)
        throw InvalidParameter("truncated space: photon cutoff must be >= 0");
    if (dim() > max_dim)
        throw InvalidParameter(fmt::format("truncated space: dimension {} exceeds cap {}", dim(), max_dim));
}

SparseHamiltonian build_exact_hamiltonian(const PhysicalParams& params, const TruncatedSpace& space)
{
    if (!(params.omega > 0.0) || !(params.omega0 > 0.0))
        throw InvalidParameter("exact hamiltonian: frequencies must be positive");

    const int d1 = static_cast<int>(space.spin_dim(1));
    const int d2 = static_cast<int>(space.spin_dim(2));
    const int nf = static_cast<int>(space.fock_dim());
    const double j1 = 0.5 * space.N1();
    const double j2 = 0.5 * space.N2();
    const double g1 = params.coupling(1);
    const double g2 = params.coupling(2);

    std::vector<Triplet> entries;
    entries.reserve(space.dim() * 9);
    auto couple = [&](std::size_t row, std::size_t col, double value) {
        entries.emplace_back(row, col, value);
        entries.emplace_back(col, row, value);
    };

    for (int k1 = 0; k1 < d1; ++k1)
        for (int k2 = 0; k2 < d2; ++k2)
            for (int n = 0; n < nf; ++n) {
                const std::size_t here = space.index(k1, k2, n);
                entries.emplace_back(here, here,
                                     params.omega0 * n +
                                         params.omega * (space.m_value(1, k1) + space.m_value(2, k2)));
                if (n + 1 >= nf)
                    continue;
                const double photon = std::sqrt(static_cast<double>(n + 1));
                // Each raise/lower of a spin pairs with both a and a^dag: the
                // transposed entry added by couple() supplies the other two products.
                if (k1 + 1 < d1) {
                    const double s = ladder_coefficient(j1, space.m_value(1, k1));
                    couple(space.index(k1 + 1, k2, n + 1), here, g1 * s * photon);  // a^dag J_+
                    couple(space.index(k1 + 1, k2, n), space.index(k1, k2, n + 1), g1 * s * photon);  // a J_+
                }
                if (k2 + 1 < d2) {
                    const double s = ladder_coefficient(j2, space.m_value(2, k2));
                    couple(space.index(k1, k2 + 1, n + 1), here, g2 * s * photon);
                    couple(space.index(k1, k2 + 1, n), space.index(k1, k2, n + 1), g2 * s * photon);
                }
            }

    const auto dim = static_cast<Eigen::Index>(space.dim());
    SparseHamiltonian H(dim, dim);
    H.setFromTriplets(entries.begin(), entries.end());
    return H;
}

ExactState decoupled_ground_state(const TruncatedSpace& space)
{
    ExactState psi;
    psi.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dim()));
    psi.amplitudes(static_cast<Eigen::Index>(space.index(0, 0, 0))) = 1.0;
    return psi;
}

ExactState evolve_exact(const SparseHamiltonian& H, const ExactState& psi0, double t, const KrylovOptions& options)
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw InvalidParameter("evolve_exact: time must be finite and non-negative");
    if (psi0.amplitudes.size() != H.rows())
        throw InvalidParameter("evolve_exact: state dimension does not match the Hamiltonian");

    ExactState out = psi0;
    out.t = psi0.t + t;
    if (t == 0.0)
        return out;

    const Eigen::Index dim = H.rows();
    const int m_max = static_cast<int>(std::min<Eigen::Index>(options.krylov_dim, dim));
    const double breakdown = 1e-13 * std::max(1.0, max_abs_row_sum(H));

    Eigen::VectorXcd psi = psi0.amplitudes;
    Eigen::MatrixXcd basis(dim, m_max);
    double remaining = t;
    int substeps = 0;

    while (remaining > 0.0) {
        if (++substeps > options.max_substeps)
            throw ConvergenceFailure("evolve_exact: too many Krylov sub-steps", remaining);

        const double norm = psi.norm();
        basis.col(0) = psi / norm;
        std::vector<double> alpha, beta;
        int m = m_max;
        bool invariant = false;
        for (int j = 0; j < m_max; ++j) {
            Eigen::VectorXcd w = H * basis.col(j);
            alpha.push_back(basis.col(j).dot(w).real());
            // Full reorthogonalization; the basis is small.
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
            const double b = w.norm();
            if (b < breakdown) {
                m = j + 1;
                invariant = true;
                break;
            }
            beta.push_back(b);
            if (j + 1 < m_max)
                basis.col(j + 1) = w / b;
        }

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            T(j, j) = alpha[static_cast<std::size_t>(j)];
            if (j + 1 < m)
                T(j, j + 1) = T(j + 1, j) = beta[static_cast<std::size_t>(j)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(T);
        const Eigen::MatrixXd& Q = tri.eigenvectors();
        const Eigen::VectorXd& lam = tri.eigenvalues();
        const double beta_last = invariant ? 0.0 : beta.back();

        double dt = remaining;
        Eigen::VectorXcd coeffs;
        double err = 0.0;
        for (;;) {
            Eigen::VectorXcd phase(m);
            for (int k = 0; k < m; ++k)
                phase(k) = std::exp(cplx(0.0, -lam(k) * dt)) * Q(0, k);
            coeffs = Q.cast<cplx>() * phase;
            err = beta_last * std::abs(coeffs(m - 1));
            if (err <= options.step_tolerance)
                break;
            dt *= 0.5;
            if (dt < 1e-14 * t)
                throw ConvergenceFailure(
                    fmt::format("evolve_exact: Krylov error {:.3e} does not drop below {:.1e}", err,
                                options.step_tolerance),
                    err);
        }

        psi = norm * (basis.leftCols(m) * coeffs);
        remaining -= dt;
        if (remaining <= 1e-15 * t)
            remaining = 0.0;
    }

    out.amplitudes = psi;
    return out;
}

double exact_energy(const SparseHamiltonian& H, const ExactState& psi)
{
    const Eigen::VectorXcd h_psi = H * psi.amplitudes;
    return psi.amplitudes.dot(h_psi).real() / psi.amplitudes.squaredNorm();
}

double ground_state_energy(const SparseHamiltonian& H)
{
    if (H.rows() > 2000)
        throw InvalidParameter("ground_state_energy: dense diagonalization capped at dimension 2000");
    const Eigen::MatrixXd dense = Eigen::MatrixXd(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

ExactMoments exact_moments(const ExactState& psi, const TruncatedSpace& space, const PhysicalParams& params)
{
    if (psi.amplitudes.size() != static_cast<Eigen::Index>(space.dim()))
        throw InvalidParameter("exact_moments: state dimension does not match the space");

    const SparseOperator jp1 = primitive_operator(space, Primitive::spin_raise_1);
    const SparseOperator jp2 = primitive_operator(space, Primitive::spin_raise_2);
    const SparseOperator a = primitive_operator(space, Primitive::annihilate);
    const cplx i_unit(0.0, 1.0);

    // Order: J_x1, J_y1, J_x2, J_y2, x_c, p_c, J_z1, J_z2.
    std::vector<SparseOperator> ops;
    ops.push_back(SparseOperator(0.5 * (jp1 + adjoint(jp1))));
    ops.push_back(SparseOperator((-0.5 * i_unit) * (jp1 - adjoint(jp1))));
    ops.push_back(SparseOperator(0.5 * (jp2 + adjoint(jp2))));
    ops.push_back(SparseOperator((-0.5 * i_unit) * (jp2 - adjoint(jp2))));
    ops.push_back(SparseOperator((1.0 / std::sqrt(2.0 * params.omega0)) * (a + adjoint(a))));
    ops.push_back(SparseOperator((i_unit * std::sqrt(params.omega0 / 2.0)) * (adjoint(a) - a)));
    ops.push_back(primitive_operator(space, Primitive::spin_z_1));
    ops.push_back(primitive_operator(space, Primitive::spin_z_2));

    const Eigen::VectorXcd& v = psi.amplitudes;
    std::vector<Eigen::VectorXcd> applied;
    for (const auto& op : ops)
        applied.push_back(op * v);

    const std::size_t n_lin = 6;
    Eigen::VectorXd mean(static_cast<Eigen::Index>(ops.size()));
    for (std::size_t k = 0; k < ops.size(); ++k)
        mean(static_cast<Eigen::Index>(k)) = v.dot(applied[k]).real();
    Eigen::MatrixXd second(n_lin, n_lin);
    for (std::size_t r = 0; r < n_lin; ++r)
        for (std::size_t c = 0; c < n_lin; ++c)
            second(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = applied[r].dot(applied[c]).real();

    ExactMoments out;
    out.spin_mean[0] = Eigen::Vector3d(mean(0), mean(1), mean(6));
    out.spin_mean[1] = Eigen::Vector3d(mean(2), mean(3), mean(7));
    out.spin_second = second.topLeftCorner<4, 4>();
    out.photon_mean = mean.segment<2>(4);
    out.photon_second = second.block<2, 2>(4, 4);

    const double n1 = space.N1(), n2 = space.N2(), w = params.omega;
    Eigen::VectorXd scale(6);
    scale << std::sqrt(2.0 / (w * n1)), -std::sqrt(2.0 * w / n1), std::sqrt(2.0 / (w * n2)),
        -std::sqrt(2.0 * w / n2), 1.0, 1.0;

    out.quadrature_mean = scale.cwiseProduct(mean.head(6));
    out.quadrature_cov = 2.0 * scale.asDiagonal() * second * scale.asDiagonal();
    out.quadrature_cov -= 2.0 * out.quadrature_mean * out.quadrature_mean.transpose();
    return out;
}

double exact_log_negativity(const ExactState& psi, const TruncatedSpace& space)
{
    const auto d1 = static_cast<Eigen::Index>(space.spin_dim(1));
    const auto d2 = static_cast<Eigen::Index>(space.spin_dim(2));
    const auto nf = static_cast<Eigen::Index>(space.fock_dim());
    if (d1 * d2 > 100)
        throw InvalidParameter("exact_log_negativity: spin-spin density matrix capped at dimension 100");
    if (psi.amplitudes.size() != d1 * d2 * nf)
        throw InvalidParameter("exact_log_negativity: state dimension does not match the space");

    // Row (k1, k2), column n.
    Eigen::MatrixXcd amp(d1 * d2, nf);
    for (Eigen::Index s = 0; s < d1 * d2; ++s)
        for (Eigen::Index n = 0; n < nf; ++n)
            amp(s, n) = psi.amplitudes(s * nf + n);
    const Eigen::MatrixXcd rho = amp * amp.adjoint() / psi.amplitudes.squaredNorm();

    Eigen::MatrixXcd pt(d1 * d2, d1 * d2);
    for (Eigen::Index a = 0; a < d1; ++a)
        for (Eigen::Index b = 0; b < d2; ++b)
            for (Eigen::Index c = 0; c < d1; ++c)
                for (Eigen::Index d = 0; d < d2; ++d)
                    pt(a * d2 + b, c * d2 + d) = rho(a * d2 + d, c * d2 + b);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(pt, Eigen::EigenvaluesOnly);
    return std::log2(solver.eigenvalues().cwiseAbs().sum());
}

ExactRun run_exact(const PhysicalParams& params, double t, const CutoffPolicy& policy, const KrylovOptions& krylov)
{
    if (policy.initial_cutoff < 1 || policy.max_cutoff < policy.initial_cutoff)
        throw InvalidParameter("run_exact: invalid cutoff policy");
    const int n1 = static_cast<int>(params.N1);
    const int n2 = static_cast<int>(params.N2);

    auto run_at = [&](int cutoff) {
        TruncatedSpace space(n1, n2, cutoff);
        const SparseHamiltonian H = build_exact_hamiltonian(params, space);
        const ExactState psi0 = decoupled_ground_state(space);
        ExactState psi = evolve_exact(H, psi0, t, krylov);
        ExactMoments moments = exact_moments(psi, space, params);
        const double e0 = exact_energy(H, psi0);
        const double drift = std::abs(exact_energy(H, psi) - e0) / std::max(std::abs(e0), 1e-300);
        return ExactRun{space, std::move(psi), std::move(moments), 0.0, false, drift};
    };

    ExactRun coarse = run_at(policy.initial_cutoff);
    for (int cutoff = 2 * policy.initial_cutoff; cutoff <= policy.max_cutoff; cutoff *= 2) {
        ExactRun fine = run_at(cutoff);
        fine.cutoff_change = std::max(
            (fine.moments.quadrature_cov - coarse.moments.quadrature_cov).cwiseAbs().maxCoeff(),
            (fine.moments.quadrature_mean - coarse.moments.quadrature_mean).cwiseAbs().maxCoeff());
        fine.converged = fine.cutoff_change < policy.tolerance;
        if (fine.converged || 2 * cutoff > policy.max_cutoff)
            return fine;
        coarse = std::move(fine);
    }
    return coarse;
}

bool OracleLadderResult::monotone_decreasing() const
{
    for (std::size_t k = 1; k < points.size(); ++k)
        if (!(points[k].max_deviation < points[k - 1].max_deviation))
            return false;
    return !points.empty();
}

bool OracleLadderResult::all_converged() const
{
    return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.converged; });
}

OracleLadderResult oracle_convergence(const OracleLadderOptions& options)
{
    if (options.ladder.empty())
        throw InvalidParameter("oracle_convergence: empty N ladder");
    if (!(options.coupling_fraction > 0.0 && options.coupling_fraction < 1.0))
        throw InvalidParameter("oracle_convergence: coupling fraction must lie in (0, 1)");
    if (!(options.time >= 0.0))
        throw InvalidParameter("oracle_convergence: time must be non-negative");

    const int n_ref = options.ladder.front();
    // G = 2 sqrt(N_ref) omega at g_ref = 1, and G = f omega^2 / sqrt(2).
    const double omega = critical_omega_resonant(1.0, n_ref) / options.coupling_fraction;

    PhysicalParams reference;
    reference.omega = reference.omega0 = omega;
    reference.g = 1.0;
    reference.N1 = reference.N2 = n_ref;

    OracleLadderResult out;
    out.omega = omega;
    out.collective = collective_coupling(reference, 1);

    const QuadraticHamiltonian H = build_hamiltonian(reference);
    const GaussianState evolved = evolve(initial_state(reference), propagator_normal_mode(H, options.time));
    out.gaussian_cov = evolved.cov().topLeftCorner(4, 4);

    for (int N : options.ladder) {
        PhysicalParams p = reference;
        p.N1 = p.N2 = N;
        p.g = out.collective / (2.0 * std::sqrt(static_cast<double>(N)) * omega);
        const ExactRun run = run_exact(p, options.time, options.cutoff);

        OracleLadderPoint point;
        point.N = N;
        point.g = p.g;
        point.photon_cutoff = run.space.photon_cutoff();
        point.cutoff_change = run.cutoff_change;
        point.converged = run.converged;
        point.exact_cov = run.moments.quadrature_cov.topLeftCorner(4, 4);
        point.max_deviation = (point.exact_cov - out.gaussian_cov).cwiseAbs().maxCoeff();
        out.points.push_back(std::move(point));
    }
    return out;
}

NegativityScan exact_negativity_scan(const PhysicalParams& params, int photon_cutoff,
                                     const std::vector<double>& t_grid, const KrylovOptions& krylov)
{
    if (t_grid.empty() || t_grid.front() < 0.0 || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw InvalidParameter("exact_negativity_scan: time grid must be non-empty, sorted and start at t >= 0");

    const TruncatedSpace space(static_cast<int>(params.N1), static_cast<int>(params.N2), photon_cutoff);
    const SparseHamiltonian H = build_exact_hamiltonian(params, space);
    ExactState psi = decoupled_ground_state(space);

    NegativityScan out;
    out.photon_cutoff = photon_cutoff;
    for (double t : t_grid) {
        psi = evolve_exact(H, psi, t - psi.t, krylov);
        const double e = exact_log_negativity(psi, space);
        out.times.push_back(t);
        out.values.push_back(e);
        if (e > out.max_value) {
            out.max_value = e;
            out.t_at_max = t;
        }
    }
    return out;
}

} // namespace vacent
