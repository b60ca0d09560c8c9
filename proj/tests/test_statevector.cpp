#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "entspec/circuit.hpp"
#include "entspec/statevector.hpp"
#include "oracle.hpp"

using namespace entspec;

TEST_CASE("fresh state is |0...0>") {
    Statevector psi(3);
    CHECK(psi.dim() == 8);
    CHECK(psi.normalized());
    CHECK(psi.amp(0) == cplx(1.0, 0.0));
    for (std::int64_t i = 1; i < 8; ++i) CHECK(psi.amp(i) == cplx(0.0, 0.0));
}

TEST_CASE("qubit cap guards construction") {
    CHECK_THROWS_AS(Statevector(23), ScaleError);
    CHECK_THROWS_AS(Statevector(0), ArgumentError);
}

TEST_CASE("from_amplitudes tracks the measured norm") {
    Eigen::VectorXcd v(4);
    v << 0.5, 0.5, 0.5, 0.5;
    CHECK(Statevector::from_amplitudes(2, v).normalized());
    v *= 2.0;
    Statevector psi = Statevector::from_amplitudes(2, v);
    CHECK_FALSE(psi.normalized());
    CHECK(psi.squared_norm() == doctest::Approx(4.0));
    psi.normalize();
    CHECK(psi.normalized());
    CHECK(psi.norm() == doctest::Approx(1.0));
}

TEST_CASE("the zero vector cannot be normalized") {
    Statevector psi = Statevector::from_amplitudes(1, Eigen::VectorXcd::Zero(2));
    CHECK_THROWS_AS(psi.normalize(), ArgumentError);
}

TEST_CASE("maximally entangled state pairs the two registers") {
    const int n = 2;
    Statevector psi = prepare_max_entangled(n);
    CHECK(psi.num_qubits() == 2 * n);
    for (std::int64_t x = 0; x < 4; ++x)
        for (std::int64_t y = 0; y < 4; ++y) {
            const cplx a = psi.amp(x | (y << n));
            if (x == y)
                CHECK(std::abs(a - 0.5) < 1e-14);
            else
                CHECK(std::abs(a) < 1e-14);
        }
}

TEST_CASE("reduced density matrix of a Bell pair is maximally mixed") {
    Statevector bell = prepare_max_entangled(1);
    for (int q : {0, 1}) {
        DensityMatrix rho = reduced_density_matrix(bell, {q});
        CHECK(oracle::max_abs(rho.entries - 0.5 * Eigen::MatrixXcd::Identity(2, 2)) < 1e-14);
    }
}

TEST_CASE("keep order controls the reduced index bits") {
    // |psi> = |q1 q0> = |10>: qubit 0 in |0>, qubit 1 in |1>
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(2) = 1.0;
    Statevector psi = Statevector::from_amplitudes(2, v);
    DensityMatrix a = reduced_density_matrix(psi, {0, 1});
    CHECK(std::abs(a.entries(2, 2) - 1.0) < 1e-14);  // bit1 = qubit 1
    DensityMatrix b = reduced_density_matrix(psi, {1, 0});
    CHECK(std::abs(b.entries(1, 1) - 1.0) < 1e-14);  // bit0 = qubit 1
}

TEST_CASE("reduced density matrices match the index-arithmetic reference") {
    std::mt19937_64 rng(0xabcdef12);
    for (int trial = 0; trial < 20; ++trial) {
        const int nq = 4;
        Eigen::VectorXcd v = oracle::random_state(nq, rng);
        Statevector psi = Statevector::from_amplitudes(nq, v);
        const std::vector<std::vector<int>> cuts = {{0}, {3}, {1, 2}, {2, 0}, {0, 1, 3}};
        for (const auto& keep : cuts) {
            DensityMatrix rho = reduced_density_matrix(psi, keep);
            CHECK(oracle::max_abs(rho.entries - oracle::reduce_state(v, nq, keep)) < 1e-12);
        }
    }
}

TEST_CASE("uev reads raw projector expectations") {
    // (|00> + |11>) / sqrt2 scaled by 2: raw squared norm 8
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0) = cplx(2.0, 0.0) / std::sqrt(2.0);
    v(3) = cplx(2.0, 0.0) / std::sqrt(2.0);
    Statevector psi = Statevector::from_amplitudes(2, v);
    CHECK(uev(psi, {{0, 0}}) == doctest::Approx(2.0));
    CHECK(uev(psi, {{0, 1}, {1, 1}}) == doctest::Approx(2.0));
    CHECK(uev(psi, {{0, 0}, {1, 1}}) == doctest::Approx(0.0));
    // conflicting outcomes on one qubit project to nothing
    CHECK(uev(psi, {{0, 0}, {0, 1}}) == doctest::Approx(0.0));
    CHECK(uev(psi, {}) == doctest::Approx(psi.squared_norm()));
}

TEST_CASE("uev outcomes over one qubit sum to the squared norm") {
    std::mt19937_64 rng(0x5151);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXcd v = oracle::random_state(3, rng) * 1.7;
        Statevector psi = Statevector::from_amplitudes(3, v);
        for (int q = 0; q < 3; ++q)
            CHECK(uev(psi, {{q, 0}}) + uev(psi, {{q, 1}}) ==
                  doctest::Approx(psi.squared_norm()).epsilon(1e-12));
    }
}

TEST_CASE("binary serialization round-trips") {
    std::mt19937_64 rng(0x77);
    Eigen::VectorXcd v = oracle::random_state(3, rng) * 0.9;
    Statevector psi = Statevector::from_amplitudes(3, v);
    const std::string path = "statevector_roundtrip.bin";
    save_statevector(path, psi);
    Statevector back = load_statevector(path);
    std::remove(path.c_str());
    REQUIRE(back.num_qubits() == 3);
    CHECK((back.amplitudes() - v).norm() == 0.0);
    CHECK(back.normalized() == psi.normalized());
}

TEST_CASE("loading garbage fails cleanly") {
    const std::string path = "statevector_garbage.bin";
    {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        std::fputs("not a statevector", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_statevector(path), FormatError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_statevector("no_such_file.bin"), FormatError);
}
