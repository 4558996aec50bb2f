#pragma once

#include "mpstab/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mpstab {

enum class ControllerKind { Proposed, Droop };

/// One converter branch of the microgrid: source reference voltage,
/// current-mode controller stage (r_p, r_q, l_q), line impedance (r_t, l_t)
/// and bus capacitance c_b. A droop branch replaces the controller stage by
/// a plain series resistor r_pd; it has no l_q/r_q state.
struct BranchParams {
    Real v_ref = 0.0;  // V
    Real r_p = 0.0;    // ohm
    Real r_q = 0.0;    // ohm
    Real l_q = 0.0;    // H
    Real r_t = 0.0;    // ohm
    Real l_t = 0.0;    // H
    Real c_b = 0.0;    // F
    ControllerKind controller = ControllerKind::Proposed;
    Real r_pd = 0.0;   // ohm, droop only

    /// Steady-state Thevenin resistance of the branch as seen from the bus.
    Real r_eq() const {
        if (controller == ControllerKind::Droop) return r_pd + r_t;
        return r_p * r_q / (r_p + r_q) + r_t;
    }
};

/// Two-segment constant power load: constant current i_max below v_min,
/// hyperbolic p_l / v above. i_max is always derived as p_l / v_min so the
/// two segments join with matching value and slope.
struct CplParams {
    Real p_l = 0.0;           // W
    Real v_min = 0.0;         // V
    Real i_max = 0.0;         // A, = p_l / v_min
    Real plug_in_time = 0.0;  // s

    static CplParams make(Real p_l, Real v_min, Real plug_in_time) {
        CplParams c;
        c.p_l = p_l;
        c.v_min = v_min;
        c.i_max = (v_min > 0.0) ? p_l / v_min : 0.0;
        c.plug_in_time = plug_in_time;
        return c;
    }
};

struct LoadParams {
    Real c_l = 0.0;  // F
    Real r_l = 0.0;  // ohm, linear resistor at the point of load
};

struct GridSpec {
    std::vector<BranchParams> branches;
    LoadParams load;
    CplParams cpl;

    int n_branches() const { return static_cast<int>(branches.size()); }
    int n_proposed() const {
        int n = 0;
        for (const auto& b : branches)
            if (b.controller == ControllerKind::Proposed) ++n;
        return n;
    }
    bool all_proposed() const { return n_proposed() == n_branches(); }
};

struct InitialState {
    bool zero = true;
    // Used only when zero == false; lengths must match the grid layout.
    std::vector<Real> i_q;
    std::vector<Real> i_t;
    std::vector<Real> v_c;
    Real v_l = 0.0;
};

struct Scenario {
    GridSpec grid;
    Real t_end = 0.0;
    Real abs_tol = 1e-8;
    Real rel_tol = 1e-6;
    InitialState initial;
    std::string name;
    std::vector<std::string> warnings;  // non-fatal validation notes
};

/// CPL terminal current. Zero while inactive, i_max at or below v_min,
/// p_l / v_l above. Continuous in v_l at v_min.
Real cpl_current(const CplParams& cpl, Real v_l, bool active);

/// Steady-state equivalent droop branch: r_pd = r_p r_q / (r_p + r_q),
/// everything else preserved. Throws WrongControllerKind for droop input.
BranchParams droop_equivalent(const BranchParams& branch);

/// Check all grid invariants; throws ValidationError with the field path on
/// the first violation, appends non-fatal notes (e.g. r_p <= r_q) to
/// `warnings` when given.
void validate(const GridSpec& grid, std::vector<std::string>* warnings = nullptr);

/// Scenario-level validation (includes the grid).
void validate(Scenario& scenario);

}  // namespace mpstab
