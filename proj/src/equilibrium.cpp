#include "mpstab/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace mpstab {

LoadQuadratic load_quadratic(const GridSpec& grid) {
    LoadQuadratic q;
    q.a = 1.0 / grid.load.r_l;
    for (const auto& b : grid.branches) {
        q.a += 1.0 / b.r_eq();
        q.b += b.v_ref / b.r_eq();
    }
    return q;
}

Real max_deliverable_power(const GridSpec& grid) {
    const LoadQuadratic q = load_quadratic(grid);
    return q.b * q.b / (4.0 * q.a);
}

namespace {

State back_substitute(const GridSpec& grid, Real v_l) {
    const StateLayout layout(grid);
    State s;
    s.i_q.resize(layout.n_iq);
    s.i_t.resize(layout.n);
    s.v_c.resize(layout.n);
    s.v_l = v_l;
    for (int i = 0; i < layout.n; ++i) {
        const auto& b = grid.branches[i];
        const Real i_t = (b.v_ref - v_l) / b.r_eq();
        s.i_t[i] = i_t;
        s.v_c[i] = v_l + b.r_t * i_t;
        if (b.controller == ControllerKind::Proposed)
            s.i_q[layout.iq_index[i]] = (b.v_ref - s.v_c[i]) / b.r_q;
    }
    return s;
}

Real per_unit_residual(const StateLayout& layout, const VecX& x, const VecX& f) {
    Real r = 0.0;
    for (int k = 0; k < layout.dim(); ++k)
        r = std::max(r, std::abs(f[k]) / std::max(1.0, std::abs(x[k])));
    return r;
}

Equilibrium polish(const GridSpec& grid, State seed, RootBranch tag, bool cpl_active,
                   bool on_hyperbola) {
    const StateLayout layout(grid);
    VecX x = layout.pack(seed);
    for (int iter = 0; iter < 12; ++iter) {
        const VecX f = rhs(grid, layout, x, cpl_active);
        if (per_unit_residual(layout, x, f) < 1e-13) break;
        const MatX jac = rhs_jacobian(grid, layout, x, cpl_active);
        x -= jac.partialPivLu().solve(f);
    }
    Equilibrium eq;
    eq.state = layout.unpack(x);
    eq.v_l = eq.state.v_l;
    eq.branch_tag = tag;
    eq.residual = per_unit_residual(layout, x, rhs(grid, layout, x, cpl_active));
    eq.on_hyperbola = on_hyperbola;
    return eq;
}

}  // namespace

std::vector<Equilibrium> solve_equilibria(const GridSpec& grid, bool cpl_active) {
    const LoadQuadratic q = load_quadratic(grid);
    std::vector<Equilibrium> out;

    if (!cpl_active || grid.cpl.p_l == 0.0) {
        const Real v = q.b / q.a;
        if (v > 0.0)
            out.push_back(polish(grid, back_substitute(grid, v), RootBranch::Upper,
                                 cpl_active, v >= grid.cpl.v_min));
        if (out.empty()) throw NoEquilibrium("solve_equilibria: no positive steady state");
        return out;
    }

    const Real p_l = grid.cpl.p_l;
    const Real disc = q.b * q.b - 4.0 * q.a * p_l;
    if (disc < 0.0)
        throw NoEquilibrium("solve_equilibria: power " + std::to_string(p_l) +
                            " W exceeds the deliverable maximum " +
                            std::to_string(q.b * q.b / (4.0 * q.a)) + " W");

    const Real sq = std::sqrt(disc);
    const Real upper = (q.b + sq) / (2.0 * q.a);
    const Real lower = (q.b - sq) / (2.0 * q.a);
    const bool coincident = disc <= 1e-12 * q.b * q.b;

    bool cc_added = false;  // constant-current segment equilibrium
    auto add_root = [&](Real v, RootBranch tag) {
        if (v >= grid.cpl.v_min) {
            out.push_back(polish(grid, back_substitute(grid, v), tag, true, true));
            return;
        }
        // Below v_min the CPL draws i_max; re-solve the then-linear balance.
        if (cc_added) return;
        const Real v_cc = (q.b - grid.cpl.i_max) / q.a;
        if (v_cc > 0.0 && v_cc < grid.cpl.v_min) {
            out.push_back(polish(grid, back_substitute(grid, v_cc), tag, true, false));
            cc_added = true;
        }
    };
    add_root(upper, RootBranch::Upper);
    if (!coincident) add_root(lower, RootBranch::Lower);

    if (out.empty()) throw NoEquilibrium("solve_equilibria: no steady state with v_l > 0");
    return out;
}

Real residual(const GridSpec& grid, const State& state, bool cpl_active) {
    const StateLayout layout(grid);
    const VecX x = layout.pack(state);
    return per_unit_residual(layout, x, rhs(grid, layout, x, cpl_active));
}

}  // namespace mpstab
