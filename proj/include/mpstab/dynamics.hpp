#pragma once

#include "mpstab/common.hpp"
#include "mpstab/grid.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mpstab {

/// Dynamic state of the grid. i_q holds one entry per proposed branch (droop
/// branches carry no controller inductor state); i_t and v_c one per branch.
struct State {
    VecX i_q;
    VecX i_t;
    VecX v_c;
    Real v_l = 0.0;
};

/// Mapping between the structured State and the flat integration vector
/// [i_q (proposed only), i_t, v_c, v_l].
struct StateLayout {
    explicit StateLayout(const GridSpec& grid);

    int n = 0;         // branches
    int n_iq = 0;      // proposed branches
    std::vector<int> iq_index;  // per branch: slot in the i_q block, -1 for droop

    int dim() const { return n_iq + 2 * n + 1; }
    int iq(int slot) const { return slot; }
    int it(int branch) const { return n_iq + branch; }
    int vc(int branch) const { return n_iq + n + branch; }
    int vl() const { return n_iq + 2 * n; }

    VecX pack(const State& s) const;
    State unpack(const VecX& x) const;
};

enum class EventKind { PlugIn, VminCross };

struct Event {
    Real time = 0.0;
    EventKind kind = EventKind::PlugIn;
};

struct TimeSeries {
    std::vector<Real> times;
    std::vector<VecX> states;  // flat vectors, layout per StateLayout
    std::vector<Event> events;

    bool empty() const { return times.empty(); }
    Real v_l_at(size_t k, const StateLayout& layout) const { return states[k][layout.vl()]; }
};

enum class Verdict { Stable, Oscillating, Diverged };

struct TrajectoryMetrics {
    Real steady_value = 0.0;   // V, measured at the end of the run
    Real overshoot = 0.0;      // V, max |v_l - steady| after plug-in
    Real settling_time = 0.0;  // s
    Verdict verdict = Verdict::Oscillating;
};

std::string to_string(Verdict v);
std::string to_string(EventKind k);

/// Time derivative of the flat state. The CPL contributes only when
/// `cpl_active`; its own v_min mode switch is internal to cpl_current.
VecX rhs(const GridSpec& grid, const StateLayout& layout, const VecX& x, bool cpl_active);

/// Structured-state variant; CPL activity decided by t >= plug_in_time.
State rhs(const GridSpec& grid, const State& state, Real t);

/// Analytic Jacobian of rhs at x (same layout). On the CPL hyperbola the
/// v_l row picks up +p_l / v_l^2; at or below v_min the CPL term is constant.
MatX rhs_jacobian(const GridSpec& grid, const StateLayout& layout, const VecX& x,
                  bool cpl_active);

/// Integrate the scenario with an embedded Dormand-Prince 4(5) pair and PI
/// step-size control. The CPL plug-in instant is hit exactly; crossings of
/// v_l through v_min are bisected to 1e-10 s and recorded as events.
/// Integration stops early once the state infinity norm exceeds 1e9.
TimeSeries simulate(const Scenario& scenario);

/// Classify a trajectory against a target steady state. Stable means v_l
/// stays within +-band_frac * target for the final hold_frac of the
/// post-plug-in window; Diverged means a non-finite sample or
/// |v_l| > 100 * target.
TrajectoryMetrics classify(const TimeSeries& series, const StateLayout& layout,
                           Real target_v_l, Real band_frac = 0.01, Real hold_frac = 0.5);

/// CSV export: header t,i_q_*,i_t_*,v_c_*,v_l at 15 significant digits,
/// events appended as `# event,<t>,<kind>` comment lines.
void write_csv(std::ostream& os, const TimeSeries& series, const GridSpec& grid);

}  // namespace mpstab
