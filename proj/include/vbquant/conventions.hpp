#pragma once

// Frozen sign conventions. s_Omega is chosen; the remaining signs are
// measured once against it and asserted by the test suites.

namespace vbquant::conventions {

/// Omega_F = symplectic_sign * 4j / (1+|z|^2)^2 dx^dy, fixed so that the
/// quantized height function has eigenvalue +j on the constant section.
inline constexpr int symplectic_sign = +1;

/// {H_a, H_b} = poisson_sign * H_{a x b} for moment Hamiltonians.
inline constexpr int poisson_sign = +1;

/// [O(H_a), O(H_b)] = dirac_sign * i * O(H_{a x b}).
inline constexpr int dirac_sign = -1;

/// Latitude holonomy of the embedded monopole of sign s is
/// diag(exp(holonomy_sign * s * i * m * 2pi(1 - cos theta))), m = j, ..., -j.
inline constexpr int holonomy_sign = +1;

/// The Moebius action quantized by the factor of automorphy is equivariant
/// for the coadjoint coordinate xi = P x, where x is the embedded point and
/// P flips the sign of this component (tau-dual basis).
inline constexpr int coadjoint_reflected_axis = 0;

/// Polarized sections carry weight z^k; the quantized transition of
/// diag(e^{it/2}, e^{-it/2}) acts on z^k by exp(i * transition_phase_sign * m t),
/// m = j - k.
inline constexpr int transition_phase_sign = -1;

}  // namespace vbquant::conventions
