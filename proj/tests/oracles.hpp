#pragma once

#include "faraday/atomdata.hpp"

namespace oracle {

/// 6j symbol from the Racah sum in exact rational arithmetic; the square root of
/// the triangle coefficients is taken in 50-digit binary floating point.
double sixj_exact(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);

/// Ground-manifold energy of |F m> from direct diagonalization of
/// A I.J + mu_B B (g_J J_z + g_I I_z) in the |m_J m_I> basis, rad/s.
double zeeman_energy(const faraday::AtomSpecies& sp, int F, int m, double B_gauss);

}  // namespace oracle
