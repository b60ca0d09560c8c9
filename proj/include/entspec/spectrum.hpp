#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "entspec/cnf.hpp"
#include "entspec/statevector.hpp"

namespace entspec {

// Descending eigenvalue list of a reduced density matrix together with the
// promise metadata used by threshold counting: lambda_star is the claimed
// upper bound on the values, delta the counting threshold with a guaranteed
// eigenvalue-free window around it.
struct SchmidtSpectrum {
    Eigen::VectorXd values;      // descending, negatives clamped to 0
    double lambda_star = 0.0;    // defaults to the top value
    double delta = 0.0;          // 0 = unset; must be set before counting
};

// Eigenvalues of a PSD matrix, descending, with |value| < 1e-12 clamped to 0.
// Throws ArgumentError for non-Hermitian input and NotPSDError for an
// eigenvalue below -1e-8. lambda_star defaults to the largest value.
SchmidtSpectrum schmidt_spectrum(const DensityMatrix& rho);

// Checks delta > 0 and delta >= lambda_star / max(num_vars,2)^poly_exponent.
void validate_spectrum_promise(const SchmidtSpectrum& s, int num_vars, int poly_exponent = 4);

// |{a : values[a] > delta}|. The promise requires no value inside
// [delta(1-eta), delta(1+eta)]; a value there raises PromiseViolation naming
// the offender.
std::int64_t count_above(const SchmidtSpectrum& s, double eta = 0.25);

// Eigenvalue-free window (upper, lower) for ground-degeneracy counting:
// eigenvalues <= upper are counted, eigenvalues >= lower are not, and the
// promise is that none lie strictly between.
struct CountPromise {
    double lower = 0.0;  // a: smallest admissible excited eigenvalue
    double upper = 0.0;  // b: largest admissible ground eigenvalue

    double gap() const { return lower - upper; }
};

// Exact count of eigenvalues <= b, multiplicity included. An eigenvalue
// strictly inside (b, a) raises PromiseViolation.
std::int64_t count_ground_degeneracy(const DiagonalHamiltonian& h, const CountPromise& p);
std::int64_t count_ground_degeneracy(const Eigen::MatrixXcd& hermitian, const CountPromise& p);

// {-ln lambda : lambda > 0} ascending; counting Schmidt values above delta
// equals counting these energies below -ln delta.
Eigen::VectorXd entanglement_hamiltonian_spectrum(const DensityMatrix& rho);

// Midpoint of the promise window of a clause-violation density matrix:
// lambda_min(support) = 1/(2^{n-2} #C), threshold at half of it.
double midgap_delta(int num_vars, int num_clauses);

// CSV export, columns: index,eigenvalue.
std::string spectrum_csv(const SchmidtSpectrum& s);

}  // namespace entspec
