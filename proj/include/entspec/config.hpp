#pragma once

#include <cstdlib>
#include <string>

namespace entspec {

// Hard ceiling on dense statevector width. Overridable through the
// ENTSPEC_MAX_QUBITS environment variable so constrained machines can lower it
// (or beefy ones raise it); the default keeps peak state memory at 64 MiB.
inline int max_qubits() {
    static const int cached = [] {
        if (const char* env = std::getenv("ENTSPEC_MAX_QUBITS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && v >= 1 && v <= 30) return static_cast<int>(v);
        }
        return 22;
    }();
    return cached;
}

namespace tol {
// Default numerical tolerances used across the library.
inline constexpr double unitary = 1e-10;     // ||U†U - I||_max for gate matrices
inline constexpr double hermitian = 1e-10;   // ||A - A†||_max
inline constexpr double psd = -1e-10;        // smallest admissible eigenvalue
inline constexpr double spectrum = 1e-12;    // eigenvalue cutoff when counting support
inline constexpr double norm = 1e-9;         // state normalization slack
}  // namespace tol

}  // namespace entspec
