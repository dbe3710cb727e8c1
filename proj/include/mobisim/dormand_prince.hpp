#pragma once

// Dormand-Prince 5(4) tableau with the 4th-order continuous extension
// (Hairer, Norsett & Wanner, "Solving ODEs I", dopri5 contd5).

#include <array>

namespace mobisim::dopri {

inline constexpr std::array<double, 7> c = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};

// Lower-triangular stage coefficients, a[i][j] for j < i.
inline constexpr std::array<std::array<double, 6>, 7> a = {{
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
}};

// 5th-order weights (equal to the last stage row: FSAL).
inline constexpr std::array<double, 7> b = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                                            -2187.0 / 6784.0, 11.0 / 84.0, 0.0};

// Embedded 4th-order weights.
inline constexpr std::array<double, 7> b_hat = {5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
                                                -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

// Error weights b - b_hat.
inline constexpr std::array<double, 7> e = {71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                            -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0};

// Dense output weights.
inline constexpr std::array<double, 7> d = {-12715105075.0 / 11282082432.0, 0.0,
                                            87487479700.0 / 32700410799.0, -10690763975.0 / 1880347072.0,
                                            701980252875.0 / 199316789632.0, -1453857185.0 / 822651844.0,
                                            69997945.0 / 29380423.0};

} // namespace mobisim::dopri
