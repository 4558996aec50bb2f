#include "mpstab/grid.hpp"

#include <cmath>
#include <string>

namespace mpstab {

Real cpl_current(const CplParams& cpl, Real v_l, bool active) {
    if (!active || cpl.p_l == 0.0) return 0.0;
    if (v_l <= cpl.v_min) return cpl.i_max;
    return cpl.p_l / v_l;
}

BranchParams droop_equivalent(const BranchParams& branch) {
    if (branch.controller == ControllerKind::Droop)
        throw WrongControllerKind("droop_equivalent: branch already uses a droop controller");
    BranchParams out = branch;
    out.controller = ControllerKind::Droop;
    out.r_pd = branch.r_p * branch.r_q / (branch.r_p + branch.r_q);
    out.r_q = 0.0;
    out.l_q = 0.0;
    out.r_p = 0.0;
    return out;
}

namespace {

void require_positive(Real value, const std::string& field) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw ValidationError(field, "must be strictly positive");
}

}  // namespace

void validate(const GridSpec& grid, std::vector<std::string>* warnings) {
    if (grid.branches.empty())
        throw ValidationError("branch", "at least one branch is required");
    for (size_t i = 0; i < grid.branches.size(); ++i) {
        const auto& b = grid.branches[i];
        const std::string p = "branch[" + std::to_string(i + 1) + "].";
        require_positive(b.v_ref, p + "v_ref");
        require_positive(b.r_t, p + "r_t");
        require_positive(b.l_t, p + "l_t");
        require_positive(b.c_b, p + "c_b");
        if (b.controller == ControllerKind::Proposed) {
            require_positive(b.r_p, p + "r_p");
            require_positive(b.r_q, p + "r_q");
            require_positive(b.l_q, p + "l_q");
            if (warnings && b.r_p <= b.r_q)
                warnings->push_back(p + "r_p <= r_q (the controller is designed for r_p >> r_q)");
        } else {
            require_positive(b.r_pd, p + "r_pd");
        }
    }
    require_positive(grid.load.c_l, "load.c_l");
    require_positive(grid.load.r_l, "load.r_l");
    if (!(grid.cpl.p_l >= 0.0) || !std::isfinite(grid.cpl.p_l))
        throw ValidationError("cpl.p_l", "must be non-negative");
    require_positive(grid.cpl.v_min, "cpl.v_min");
    if (!(grid.cpl.plug_in_time >= 0.0))
        throw ValidationError("cpl.plug_in_time", "must be non-negative");
    if (std::abs(grid.cpl.i_max * grid.cpl.v_min - grid.cpl.p_l) >
        1e-12 * std::max(1.0, grid.cpl.p_l))
        throw ValidationError("cpl.i_max", "must equal p_l / v_min");
}

void validate(Scenario& scenario) {
    validate(scenario.grid, &scenario.warnings);
    if (!(scenario.t_end > scenario.grid.cpl.plug_in_time))
        throw ValidationError("sim.t_end", "must exceed cpl.plug_in_time");
    if (!(scenario.abs_tol > 0.0 && scenario.abs_tol < 1.0))
        throw ValidationError("sim.abs_tol", "must lie in (0, 1)");
    if (!(scenario.rel_tol > 0.0 && scenario.rel_tol < 1.0))
        throw ValidationError("sim.rel_tol", "must lie in (0, 1)");
    if (!scenario.initial.zero) {
        const int n = scenario.grid.n_branches();
        if (static_cast<int>(scenario.initial.i_t.size()) != n ||
            static_cast<int>(scenario.initial.v_c.size()) != n ||
            static_cast<int>(scenario.initial.i_q.size()) != scenario.grid.n_proposed())
            throw ValidationError("sim.initial", "state arrays do not match the grid layout");
    }
}

}  // namespace mpstab
