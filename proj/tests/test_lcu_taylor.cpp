#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "entspec/gates.hpp"
#include "entspec/lcu_taylor.hpp"
#include "oracle.hpp"

using namespace entspec;
using cplx = std::complex<double>;

namespace {

DensityMatrix wrap_density(int n, Eigen::MatrixXcd entries) {
    DensityMatrix rho;
    rho.num_qubits = n;
    rho.entries = std::move(entries);
    rho.normalized = true;
    return rho;
}

Statevector from_vec(int n, const Eigen::VectorXcd& v) {
    return Statevector::from_amplitudes(n, Eigen::VectorXcd(v));
}

}  // namespace

TEST_CASE("pauli strings decompose and recompose exactly") {
    std::mt19937_64 rng(0x60);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const DensityMatrix rho = wrap_density(n, oracle::random_density(n, rng));
            const PauliDecomposition a = pauli_decompose(rho);
            REQUIRE(a.coefficients.size() == (Eigen::Index{1} << (2 * n)));
            CHECK(a.coefficients(0) == doctest::Approx(std::pow(2.0, -n)));
            const DensityMatrix back = pauli_recompose(a);
            CHECK(oracle::max_abs(back.entries - rho.entries) < 1e-12);
        }
    }
    const DensityMatrix big =
        wrap_density(7, Eigen::MatrixXcd::Identity(128, 128) / 128.0);
    CHECK_THROWS_AS(pauli_decompose(big), ScaleError);

    PauliDecomposition short_a;
    short_a.num_qubits = 2;
    short_a.coefficients = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(pauli_recompose(short_a), DimensionError);
}

TEST_CASE("pauli string index reads two bits per qubit") {
    CHECK(oracle::max_abs(pauli_matrix(1, 0) - gate_i()) < 1e-15);
    CHECK(oracle::max_abs(pauli_matrix(1, 1) - gate_x()) < 1e-15);
    CHECK(oracle::max_abs(pauli_matrix(1, 2) - gate_y()) < 1e-15);
    CHECK(oracle::max_abs(pauli_matrix(1, 3) - gate_z()) < 1e-15);
    // index 4 = qubit 1 letter X, qubit 0 letter I; qubit 1 is the high factor
    CHECK(oracle::max_abs(pauli_matrix(2, 4) - oracle::kron_mat(gate_x(), gate_i())) < 1e-15);
    CHECK(oracle::max_abs(pauli_matrix(2, 3) - oracle::kron_mat(gate_i(), gate_z())) < 1e-15);
    CHECK(oracle::max_abs(pauli_matrix(2, 9) - oracle::kron_mat(gate_y(), gate_x())) < 1e-15);

    for (std::int64_t i = 0; i < 16; ++i)
        for (std::int64_t j = 0; j < 16; ++j) {
            const cplx tr = (pauli_matrix(2, i) * pauli_matrix(2, j)).trace();
            CHECK(std::abs(tr - (i == j ? cplx(4.0, 0) : cplx(0, 0))) < 1e-12);
        }

    CHECK_THROWS_AS(pauli_matrix(7, 0), ArgumentError);
    CHECK_THROWS_AS(pauli_matrix(2, 16), ArgumentError);
    CHECK_THROWS_AS(pauli_matrix(2, -1), ArgumentError);
}

TEST_CASE("truncation order matches the tail bound") {
    CHECK(choose_K(1.0, 1e-8) == 12);
    CHECK(choose_K(0.0, 1e-8) == 0);
    CHECK_THROWS_AS(choose_K(1.0, 1.5), ArgumentError);
    CHECK_THROWS_AS(choose_K(-0.5, 0.5), ArgumentError);

    std::mt19937_64 rng(0x61);
    std::uniform_real_distribution<double> xs(0.1, 6.0);
    for (double eps : {1e-4, 1e-8, 1e-12}) {
        for (int trial = 0; trial < 20; ++trial) {
            const double x = xs(rng);
            const int K = choose_K(x, eps);
            auto bound = [&](int k) {
                return (k + 1) * (1.0 + std::log(x) - std::log(k + 1.0));
            };
            CHECK(bound(K) <= std::log(eps));
            if (K > 0) CHECK(bound(K - 1) > std::log(eps));
        }
    }

    const TaylorPlan plan = make_plan(2.0, 2.0, 1e-8);
    CHECK(plan.K == choose_K(2.0, 1e-8));
    CHECK(plan.t == doctest::Approx(2.0));
    CHECK(plan.epsilon == doctest::Approx(1e-8));
}

TEST_CASE("unary superposition spans the staircase states") {
    const Statevector s3 = run_circuit(unary_superposition(3));
    REQUIRE(s3.num_qubits() == 3);
    for (std::int64_t x = 0; x < 8; ++x) {
        const bool stair = x == 0 || x == 1 || x == 3 || x == 7;
        CHECK(std::abs(s3.amp(x) - (stair ? cplx(0.5, 0) : cplx(0, 0))) < 1e-12);
    }
    const Statevector s1 = run_circuit(unary_superposition(1));
    CHECK(std::abs(s1.amp(0) - cplx(1.0 / std::sqrt(2.0), 0)) < 1e-12);
    CHECK(std::abs(s1.amp(1) - cplx(1.0 / std::sqrt(2.0), 0)) < 1e-12);

    const Circuit idle = unary_superposition(0);
    CHECK(idle.num_qubits() == 1);
    CHECK(std::abs(run_circuit(idle).amp(0) - cplx(1, 0)) < 1e-15);
}

TEST_CASE("real state preparation hits arbitrary sign patterns") {
    std::mt19937_64 rng(0x62);
    std::normal_distribution<double> gauss;
    for (int d = 1; d <= 3; ++d) {
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd v(Eigen::Index{1} << d);
            for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
            v.normalize();
            Circuit c(d);
            std::vector<int> qubits(static_cast<std::size_t>(d));
            std::iota(qubits.begin(), qubits.end(), 0);
            append_real_state_prep(c, v, qubits);
            const Statevector out = run_circuit(c);
            for (Eigen::Index i = 0; i < v.size(); ++i)
                CHECK(std::abs(out.amp(i) - cplx(v(i), 0)) < 1e-12);
        }
    }
    Circuit c(2);
    Eigen::VectorXd bad(4);
    bad << 1, 1, 0, 0;  // not normalized
    CHECK_THROWS_AS(append_real_state_prep(c, bad, {0, 1}), ArgumentError);
    Eigen::VectorXd shortv(3);
    shortv << 1, 0, 0;
    CHECK_THROWS_AS(append_real_state_prep(c, shortv, {0, 1}), DimensionError);
}

TEST_CASE("coefficient-state encoding post-selects the preparer cleanly") {
    // Bell preparer: flag untouched, so c = 1 and rho = I/2
    Circuit prep(3);
    prep.h(2);
    prep.cnot(2, 1);
    Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const BlockCircuit bc = encode_A(from_vec(2, bell), prep, 1);
    REQUIRE(bc.circuit.num_qubits() == 5);
    CHECK(std::abs(bc.scale - cplx(2.0, 0)) < 1e-12);
    CHECK(bc.input_norm == doctest::Approx(2.0));

    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(32);
    in(0) = in(6) = 1.0 / std::sqrt(2.0);  // |xi> with flag 0, index zeroed
    const Statevector out = apply_circuit(bc.circuit, from_vec(5, in));
    const Eigen::VectorXd expect_a = pauli_decompose(wrap_density(
        1, Eigen::MatrixXcd::Identity(2, 2) / 2.0)).coefficients;
    for (std::int64_t i = 0; i < 4; ++i)
        CHECK(std::abs(out.amp(i << 3) - cplx(expect_a(i), 0)) < 1e-12);

    // partial flag rotation: c = cos(1/2), system state |+>
    Circuit prep2(2);
    prep2.h(1);
    prep2.ry(1.0, 0);
    Eigen::VectorXcd plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const BlockCircuit bc2 = encode_A(from_vec(1, plus), prep2, 1);
    const double c = std::cos(0.5);
    CHECK(std::abs(bc2.scale - cplx(2.0 * c, 0)) < 1e-12);

    Eigen::VectorXcd in2 = Eigen::VectorXcd::Zero(16);
    in2(0) = in2(2) = 1.0 / std::sqrt(2.0);  // |+> on qubit 1, flag 0
    const Statevector out2 = apply_circuit(bc2.circuit, from_vec(4, in2));
    const double half[4] = {0.5, 0.5, 0.0, 0.0};  // |+><+| coefficients
    for (std::int64_t i = 0; i < 4; ++i)
        CHECK(std::abs(out2.amp(i << 2) - cplx(c * half[i], 0)) < 1e-12);

    // contract violations
    Eigen::VectorXcd zero(2);
    zero << 1.0, 0.0;
    CHECK_THROWS_AS(encode_A(from_vec(1, zero), prep2, 1), PrepError);
    CHECK_THROWS_AS(encode_A(from_vec(1, plus), prep2, 0), ArgumentError);
    CHECK_THROWS_AS(encode_A(from_vec(1, plus), prep2, 2), ArgumentError);
    CHECK_THROWS_AS(encode_A(from_vec(2, bell), prep2, 1), DimensionError);
}

TEST_CASE("single-term selector leaves rho over 2^n on the index-zero block") {
    std::mt19937_64 rng(0x63);
    for (int n = 1; n <= 2; ++n) {
        const Eigen::MatrixXcd rho = oracle::random_density(n, rng);
        const PauliDecomposition a = pauli_decompose(wrap_density(n, rho));
        const double t = 0.7;
        const BlockCircuit bc = v_rho_t(a, t);
        REQUIRE(bc.circuit.num_qubits() == 3 * n);
        CHECK(static_cast<int>(bc.post.size()) == 2 * n);

        const Eigen::VectorXcd psi = oracle::random_state(n, rng);
        const Eigen::VectorXcd avec = a.coefficients.cast<cplx>();  // formal, unnormalized
        const Statevector out =
            apply_circuit(bc.circuit, from_vec(3 * n, oracle::kron_vec(avec, psi)));

        const Eigen::VectorXcd expect = rho * psi / std::pow(2.0, n);
        const Eigen::VectorXcd via_scale = bc.scale * (cplx(0, t) * (rho * psi));
        for (std::int64_t s = 0; s < (std::int64_t{1} << n); ++s) {
            CHECK(std::abs(out.amp(s) - expect(s)) < 1e-12);
            CHECK(std::abs(out.amp(s) - via_scale(s)) < 1e-12);
        }
    }
    PauliDecomposition a1;
    a1.num_qubits = 1;
    a1.coefficients = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(v_rho_t(a1, 0.0), ArgumentError);
}

TEST_CASE("taylor selector folds the stage factors per unary value") {
    std::mt19937_64 rng(0x64);
    const int n = 1, K = 2;
    const Eigen::MatrixXcd rho = oracle::random_density(n, rng);
    const PauliDecomposition a = pauli_decompose(wrap_density(n, rho));
    const Eigen::VectorXcd psi = oracle::random_state(n, rng);

    for (double t : {0.7, 2.0}) {
        const double beta = std::max(1.0, 1.0 / t);
        const BlockCircuit bc = v_taylor(a, t, K);
        REQUIRE(bc.circuit.num_qubits() == n + 2 * K + 2 * n * K);
        CHECK(static_cast<int>(bc.post.size()) == 2 * n * K + K);

        // input (low to high): system psi, unary staircase, rot zeros, K copies of A
        const Eigen::VectorXcd avec = a.coefficients.cast<cplx>();
        Eigen::VectorXcd rot0 = Eigen::VectorXcd::Zero(4);
        rot0(0) = 1.0;
        for (int k = 0; k <= K; ++k) {
            Eigen::VectorXcd unary = Eigen::VectorXcd::Zero(4);
            unary((std::int64_t{1} << k) - 1) = 1.0;
            Eigen::VectorXcd in = oracle::kron_vec(
                avec, oracle::kron_vec(avec,
                                       oracle::kron_vec(rot0, oracle::kron_vec(unary, psi))));
            const Statevector out = apply_circuit(bc.circuit, from_vec(9, in));

            Eigen::MatrixXcd stagework = Eigen::MatrixXcd::Identity(2, 2);
            for (int m = 1; m <= k; ++m) stagework *= rho / (m * beta * 2.0);
            cplx idle = 1.0;
            for (int m = k + 1; m <= K; ++m) idle *= a.coefficients(0) / (cplx(0, 1) * t * beta);
            const Eigen::VectorXcd expect = idle * (stagework * psi);

            const std::int64_t offset = ((std::int64_t{1} << k) - 1) << n;
            for (std::int64_t s = 0; s < 2; ++s)
                CHECK(std::abs(out.amp(s | offset) - expect(s)) < 1e-12);

            // with beta = 1 and unit trace this is exactly scale * (i rho t)^k / k!
            if (t == 2.0) {
                Eigen::MatrixXcd powk = Eigen::MatrixXcd::Identity(2, 2);
                for (int m = 1; m <= k; ++m) powk *= rho * cplx(0, t) / static_cast<double>(m);
                const Eigen::VectorXcd formal = bc.scale * (powk * psi);
                for (std::int64_t s = 0; s < 2; ++s)
                    CHECK(std::abs(out.amp(s | offset) - formal(s)) < 1e-12);
            }
        }
    }

    CHECK_THROWS_AS(v_taylor(a, 0.0, 2), ArgumentError);
    CHECK_THROWS_AS(v_taylor(a, 1.0, 0), ArgumentError);
    PauliDecomposition a2;
    a2.num_qubits = 2;
    a2.coefficients = Eigen::VectorXd::Zero(16);
    a2.coefficients(0) = 0.25;
    CHECK_THROWS_AS(v_taylor(a2, 1.0, 4), ArgumentError);  // 26 qubits > cap
}

TEST_CASE("assembled evolution matches the exact exponential") {
    std::mt19937_64 rng(0x65);
    for (int n = 1; n <= 2; ++n) {
        for (double t : {M_PI / 4.0, M_PI}) {
            const Eigen::MatrixXcd rho = oracle::random_density(n, rng);
            const PauliDecomposition a = pauli_decompose(wrap_density(n, rho));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
            const TaylorPlan plan = make_plan(t * es.eigenvalues().maxCoeff(), t, 1e-8);
            const AssembledExp res = assemble_exp(a, plan, true);
            CHECK(res.achieved_error <= 1e-8);
            const Eigen::MatrixXcd normalized = res.block / res.scale;
            CHECK(oracle::op_norm(normalized - oracle::expm_i(rho, t)) <= 1e-8);
            CHECK_FALSE(res.circuit.has_value());
        }
    }

    // zero time collapses to the identity with unit scale
    PauliDecomposition a1 = pauli_decompose(
        wrap_density(1, Eigen::MatrixXcd::Identity(2, 2) / 2.0));
    const AssembledExp at0 = assemble_exp(a1, make_plan(0.0, 0.0, 1e-8));
    CHECK(at0.plan.K == 0);
    CHECK(std::abs(at0.scale - cplx(1, 0)) < 1e-15);
    CHECK(oracle::max_abs(at0.block - Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);

    // a deliberately short plan trips the truncation check
    const Eigen::MatrixXcd rho = oracle::random_density(1, rng);
    const PauliDecomposition a = pauli_decompose(wrap_density(1, rho));
    CHECK_THROWS_AS(assemble_exp(a, TaylorPlan{1, 3.0, 1e-12}), TruncationError);
}

TEST_CASE("assembled circuit reproduces the operator block") {
    std::mt19937_64 rng(0x66);
    const Eigen::MatrixXcd rho = oracle::random_density(1, rng);
    const PauliDecomposition a = pauli_decompose(wrap_density(1, rho));
    const TaylorPlan plan = make_plan(0.1, 0.1, 1e-6);
    REQUIRE(plan.K == 4);

    const AssembledExp res = assemble_exp(a, plan);
    REQUIRE(res.circuit.has_value());
    CHECK(res.circuit->circuit.num_qubits() == 17);
    const Eigen::MatrixXcd probed = extract_block(*res.circuit) * res.circuit->input_norm;
    CHECK(oracle::max_abs(probed - res.block) < 1e-9);

    BlockCircuit wide;
    wide.circuit = Circuit(5);
    wide.block_register = {0, 1, 2, 3, 4};
    CHECK_THROWS_AS(extract_block(wide), ArgumentError);
}
