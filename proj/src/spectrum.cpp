#include "entspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace entspec {

namespace {

Eigen::VectorXd descending_clamped_eigenvalues(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
    Eigen::VectorXd vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals(i) < -1e-8)
            throw NotPSDError("matrix has negative eigenvalue " + std::to_string(vals(i)));
        if (std::abs(vals(i)) < tol::spectrum) vals(i) = 0.0;
        else if (vals(i) < 0.0) vals(i) = 0.0;  // within PSD tolerance
    }
    std::sort(vals.data(), vals.data() + vals.size(), std::greater<double>());
    return vals;
}

}  // namespace

SchmidtSpectrum schmidt_spectrum(const DensityMatrix& rho) {
    validate_density(rho);
    SchmidtSpectrum s;
    s.values = descending_clamped_eigenvalues(rho.entries);
    s.lambda_star = s.values.size() ? s.values(0) : 0.0;
    s.delta = 0.0;
    return s;
}

void validate_spectrum_promise(const SchmidtSpectrum& s, int num_vars, int poly_exponent) {
    if (s.delta <= 0.0) throw ArgumentError("counting threshold delta must be positive");
    if (s.values.size() && s.values(0) > s.lambda_star + 1e-10)
        throw ArgumentError("spectrum exceeds its claimed upper bound lambda_star");
    const double base = std::max(num_vars, 2);
    const double floor = s.lambda_star / std::pow(base, poly_exponent);
    if (s.delta < floor - 1e-15)
        throw ArgumentError("delta is below the polynomial floor lambda_star/n^c");
}

std::int64_t count_above(const SchmidtSpectrum& s, double eta) {
    if (s.delta <= 0.0) throw ArgumentError("counting threshold delta must be positive");
    if (eta <= 0.0 || eta >= 1.0) throw ArgumentError("promise window eta must lie in (0,1)");
    const double lo = s.delta * (1.0 - eta), hi = s.delta * (1.0 + eta);
    std::int64_t count = 0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        const double v = s.values(i);
        if (v >= lo && v <= hi)
            throw PromiseViolation("eigenvalue " + std::to_string(v) +
                                   " lies inside the promise window around delta = " +
                                   std::to_string(s.delta));
        if (v > s.delta) ++count;
    }
    return count;
}

namespace {

std::int64_t count_below_with_promise(const Eigen::VectorXd& eigs, const CountPromise& p) {
    if (p.lower <= p.upper) throw ArgumentError("count promise needs a > b");
    std::int64_t count = 0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        const double v = eigs(i);
        if (v > p.upper && v < p.lower)
            throw PromiseViolation("eigenvalue " + std::to_string(v) +
                                   " lies strictly inside the promised window (" +
                                   std::to_string(p.upper) + ", " + std::to_string(p.lower) + ")");
        if (v <= p.upper) ++count;
    }
    return count;
}

}  // namespace

std::int64_t count_ground_degeneracy(const DiagonalHamiltonian& h, const CountPromise& p) {
    Eigen::VectorXd eigs(static_cast<Eigen::Index>(h.violations.size()));
    for (std::size_t i = 0; i < h.violations.size(); ++i)
        eigs(static_cast<Eigen::Index>(i)) = static_cast<double>(h.violations[i]);
    return count_below_with_promise(eigs, p);
}

std::int64_t count_ground_degeneracy(const Eigen::MatrixXcd& hermitian, const CountPromise& p) {
    if (hermitian.rows() != hermitian.cols()) throw DimensionError("operator must be square");
    if ((hermitian - hermitian.adjoint()).cwiseAbs().maxCoeff() > tol::hermitian)
        throw ArgumentError("operator must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
    if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
    return count_below_with_promise(es.eigenvalues(), p);
}

Eigen::VectorXd entanglement_hamiltonian_spectrum(const DensityMatrix& rho) {
    const SchmidtSpectrum s = schmidt_spectrum(rho);
    std::vector<double> energies;
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
        if (s.values(i) > 0.0) energies.push_back(-std::log(s.values(i)));
    std::sort(energies.begin(), energies.end());
    Eigen::VectorXd out(static_cast<Eigen::Index>(energies.size()));
    for (std::size_t i = 0; i < energies.size(); ++i) out(static_cast<Eigen::Index>(i)) = energies[i];
    return out;
}

double midgap_delta(int num_vars, int num_clauses) {
    if (num_vars < 1 || num_clauses < 1) throw ArgumentError("midgap needs n >= 1 and #C >= 1");
    // support floor is 1/(2^{n-2} #C) = lambda*/#C; half of it is tie-free
    return std::pow(2.0, -(num_vars - 1)) / static_cast<double>(num_clauses);
}

std::string spectrum_csv(const SchmidtSpectrum& s) {
    std::ostringstream out;
    out.precision(17);
    out << "index,eigenvalue\n";
    for (Eigen::Index i = 0; i < s.values.size(); ++i) out << i << ',' << s.values(i) << '\n';
    return out.str();
}

}  // namespace entspec
