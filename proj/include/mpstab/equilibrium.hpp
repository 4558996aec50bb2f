#pragma once

#include "mpstab/common.hpp"
#include "mpstab/dynamics.hpp"
#include "mpstab/grid.hpp"

#include <vector>

namespace mpstab {

enum class RootBranch { Upper, Lower };

/// A verified steady state: full state, load-bus voltage, which root of the
/// load quadratic it came from, the per-unit residual after Newton polish,
/// and whether the CPL operates on its hyperbolic segment there.
struct Equilibrium {
    State state;
    Real v_l = 0.0;
    RootBranch branch_tag = RootBranch::Upper;
    Real residual = 0.0;
    bool on_hyperbola = true;
};

/// Coefficients of the load balance a v^2 - b v + p_l = 0 obtained by
/// Thevenin-reducing every branch: a = 1/r_l + sum 1/r_eq, b = sum v_ref/r_eq.
struct LoadQuadratic {
    Real a = 0.0;
    Real b = 0.0;
};

LoadQuadratic load_quadratic(const GridSpec& grid);

/// All steady states with v_l > 0, Newton-polished to residual < 1e-9.
/// With the CPL active the hyperbola roots come from the quadratic; roots
/// below v_min are re-solved on the constant-current segment and flagged
/// on_hyperbola = false. Throws NoEquilibrium when none exists.
std::vector<Equilibrium> solve_equilibria(const GridSpec& grid, bool cpl_active);

/// Largest CPL power admitting a real equilibrium: b^2 / (4a).
Real max_deliverable_power(const GridSpec& grid);

/// Infinity norm of rhs with each component normalized by max(1, |x_k|).
Real residual(const GridSpec& grid, const State& state, bool cpl_active = true);

}  // namespace mpstab
