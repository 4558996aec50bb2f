#include "mpstab/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace mpstab {

StateLayout::StateLayout(const GridSpec& grid) {
    n = grid.n_branches();
    iq_index.assign(n, -1);
    for (int i = 0; i < n; ++i)
        if (grid.branches[i].controller == ControllerKind::Proposed) iq_index[i] = n_iq++;
}

VecX StateLayout::pack(const State& s) const {
    VecX x(dim());
    x.segment(0, n_iq) = s.i_q;
    x.segment(n_iq, n) = s.i_t;
    x.segment(n_iq + n, n) = s.v_c;
    x[vl()] = s.v_l;
    return x;
}

State StateLayout::unpack(const VecX& x) const {
    State s;
    s.i_q = x.segment(0, n_iq);
    s.i_t = x.segment(n_iq, n);
    s.v_c = x.segment(n_iq + n, n);
    s.v_l = x[vl()];
    return s;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Oscillating: return "Oscillating";
        case Verdict::Diverged: return "Diverged";
    }
    return "?";
}

std::string to_string(EventKind k) {
    return k == EventKind::PlugIn ? "PlugIn" : "VminCross";
}

VecX rhs(const GridSpec& grid, const StateLayout& layout, const VecX& x, bool cpl_active) {
    VecX dx(layout.dim());
    const Real v_l = x[layout.vl()];
    Real i_sum = 0.0;
    for (int i = 0; i < layout.n; ++i) {
        const auto& b = grid.branches[i];
        const Real i_t = x[layout.it(i)];
        const Real v_c = x[layout.vc(i)];
        i_sum += i_t;
        dx[layout.it(i)] = (v_c - v_l - b.r_t * i_t) / b.l_t;
        if (b.controller == ControllerKind::Proposed) {
            const Real i_q = x[layout.iq(layout.iq_index[i])];
            dx[layout.iq(layout.iq_index[i])] = (-i_q * b.r_q + b.v_ref - v_c) / b.l_q;
            dx[layout.vc(i)] = ((b.v_ref - v_c) / b.r_p + i_q - i_t) / b.c_b;
        } else {
            dx[layout.vc(i)] = ((b.v_ref - v_c) / b.r_pd - i_t) / b.c_b;
        }
    }
    const Real i_cpl = cpl_current(grid.cpl, v_l, cpl_active);
    dx[layout.vl()] = (i_sum - i_cpl - v_l / grid.load.r_l) / grid.load.c_l;
    return dx;
}

State rhs(const GridSpec& grid, const State& state, Real t) {
    const StateLayout layout(grid);
    return layout.unpack(rhs(grid, layout, layout.pack(state), t >= grid.cpl.plug_in_time));
}

MatX rhs_jacobian(const GridSpec& grid, const StateLayout& layout, const VecX& x,
                  bool cpl_active) {
    MatX jac = MatX::Zero(layout.dim(), layout.dim());
    const int vl = layout.vl();
    const Real v_l = x[vl];
    for (int i = 0; i < layout.n; ++i) {
        const auto& b = grid.branches[i];
        const int it = layout.it(i);
        const int vc = layout.vc(i);
        jac(it, vc) = 1.0 / b.l_t;
        jac(it, vl) = -1.0 / b.l_t;
        jac(it, it) = -b.r_t / b.l_t;
        if (b.controller == ControllerKind::Proposed) {
            const int iq = layout.iq(layout.iq_index[i]);
            jac(iq, iq) = -b.r_q / b.l_q;
            jac(iq, vc) = -1.0 / b.l_q;
            jac(vc, vc) = -1.0 / (b.r_p * b.c_b);
            jac(vc, iq) = 1.0 / b.c_b;
            jac(vc, it) = -1.0 / b.c_b;
        } else {
            jac(vc, vc) = -1.0 / (b.r_pd * b.c_b);
            jac(vc, it) = -1.0 / b.c_b;
        }
        jac(vl, it) = 1.0 / grid.load.c_l;
    }
    Real d_icpl = 0.0;  // d(i_cpl)/d(v_l)
    if (cpl_active && grid.cpl.p_l > 0.0 && v_l > grid.cpl.v_min)
        d_icpl = -grid.cpl.p_l / (v_l * v_l);
    jac(vl, vl) = (-d_icpl - 1.0 / grid.load.r_l) / grid.load.c_l;
    return jac;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr Real kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr Real kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr Real kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                         -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr Real kB4[7] = {5179.0 / 57600,  0.0,       7571.0 / 16695, 393.0 / 640,
                         -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct StepResult {
    VecX y;
    Real err = 0.0;  // scaled error estimate
};

class Dopri5 {
public:
    Dopri5(const GridSpec& grid, const StateLayout& layout, Real abs_tol, Real rel_tol)
        : grid_(grid), layout_(layout), atol_(abs_tol), rtol_(rel_tol) {}

    StepResult step(Real t, const VecX& y, Real h, bool cpl_active) const {
        const int dim = layout_.dim();
        std::array<VecX, 7> k;
        k[0] = rhs(grid_, layout_, y, cpl_active);
        for (int s = 1; s < 7; ++s) {
            VecX ys = y;
            for (int j = 0; j < s; ++j)
                if (kA[s][j] != 0.0) ys += (h * kA[s][j]) * k[j];
            k[s] = rhs(grid_, layout_, ys, cpl_active);
            (void)t;
        }
        StepResult out;
        out.y = y;
        VecX e = VecX::Zero(dim);
        for (int s = 0; s < 7; ++s) {
            if (kB5[s] != 0.0) out.y += (h * kB5[s]) * k[s];
            e += (h * (kB5[s] - kB4[s])) * k[s];
        }
        Real acc = 0.0;
        for (int i = 0; i < dim; ++i) {
            const Real sc = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(out.y[i]));
            const Real r = e[i] / sc;
            acc += r * r;
        }
        out.err = std::sqrt(acc / dim);
        return out;
    }

private:
    const GridSpec& grid_;
    const StateLayout& layout_;
    Real atol_, rtol_;
};

Real initial_step(const GridSpec& grid, const StateLayout& layout, const VecX& y0,
                  bool cpl_active, Real span) {
    const VecX f0 = rhs(grid, layout, y0, cpl_active);
    const Real d0 = y0.norm();
    const Real d1 = f0.norm();
    Real h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-4;
    return std::min({h, 0.1, span / 10.0});
}

}  // namespace

TimeSeries simulate(const Scenario& scenario) {
    const GridSpec& grid = scenario.grid;
    const StateLayout layout(grid);
    const Real t_plug = grid.cpl.plug_in_time;
    const bool has_cpl = grid.cpl.p_l > 0.0;

    VecX y(layout.dim());
    if (scenario.initial.zero) {
        y.setZero();
    } else {
        State s;
        s.i_q = Eigen::Map<const VecX>(scenario.initial.i_q.data(), scenario.initial.i_q.size());
        s.i_t = Eigen::Map<const VecX>(scenario.initial.i_t.data(), scenario.initial.i_t.size());
        s.v_c = Eigen::Map<const VecX>(scenario.initial.v_c.data(), scenario.initial.v_c.size());
        s.v_l = scenario.initial.v_l;
        y = layout.pack(s);
    }

    TimeSeries series;
    Real t = 0.0;
    bool cpl_active = has_cpl && t >= t_plug;
    if (has_cpl && t_plug == 0.0) series.events.push_back({0.0, EventKind::PlugIn});
    series.times.push_back(t);
    series.states.push_back(y);

    const Dopri5 stepper(grid, layout, scenario.abs_tol, scenario.rel_tol);
    Real h = initial_step(grid, layout, y, cpl_active, scenario.t_end);
    Real err_prev = 1e-4;
    constexpr Real kSafety = 0.9, kAlpha = 0.7 / 5.0, kBeta = 0.4 / 5.0;
    constexpr Real kMinStep = 1e-14;
    bool just_rejected = false;

    while (t < scenario.t_end) {
        if (!y.allFinite())
            throw NonFiniteState("simulate: non-finite state at t = " + std::to_string(t));
        bool hit_plug = false;
        if (has_cpl && !cpl_active && t + h >= t_plug - 1e-15) {
            h = t_plug - t;
            hit_plug = true;
            if (h <= kMinStep) {  // already at the boundary
                cpl_active = true;
                series.events.push_back({t, EventKind::PlugIn});
                h = std::max(initial_step(grid, layout, y, true, scenario.t_end - t), kMinStep);
                continue;
            }
        } else if (t + h > scenario.t_end) {
            h = scenario.t_end - t;
        }
        if (h < kMinStep)
            throw StepSizeUnderflow("simulate: step underflow at t = " + std::to_string(t) +
                                    ", v_l = " + std::to_string(y[layout.vl()]));

        StepResult r = stepper.step(t, y, h, cpl_active);
        if (!std::isfinite(r.err) || r.err > 1.0) {
            Real fac = std::isfinite(r.err)
                           ? std::max(0.2, kSafety * std::pow(r.err, -kAlpha))
                           : 0.2;
            h *= std::min(fac, 1.0);
            just_rejected = true;
            continue;
        }

        // v_min crossing localization (CPL active only; the plug-in step
        // boundary keeps crossings out of the inactive regime).
        if (cpl_active && has_cpl) {
            const Real g0 = y[layout.vl()] - grid.cpl.v_min;
            const Real g1 = r.y[layout.vl()] - grid.cpl.v_min;
            if ((g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0)) {
                Real lo = 0.0, hi = h;
                VecX y_hi = r.y;
                while (hi - lo > 1e-10) {
                    const Real mid = 0.5 * (lo + hi);
                    StepResult rm = stepper.step(t, y, mid, cpl_active);
                    const Real gm = rm.y[layout.vl()] - grid.cpl.v_min;
                    if ((g0 > 0.0 && gm <= 0.0) || (g0 < 0.0 && gm >= 0.0)) {
                        hi = mid;
                        y_hi = rm.y;
                    } else {
                        lo = mid;
                    }
                }
                t += hi;
                y = y_hi;
                series.times.push_back(t);
                series.states.push_back(y);
                series.events.push_back({t, EventKind::VminCross});
                // restart with a fresh, conservative step
                h = std::max(std::min(h, hi), 16 * kMinStep);
                err_prev = 1e-4;
                just_rejected = false;
                if (y.lpNorm<Eigen::Infinity>() > 1e9) break;
                continue;
            }
        }

        t += h;
        y = r.y;
        series.times.push_back(t);
        series.states.push_back(y);
        if (hit_plug) {
            cpl_active = true;
            series.events.push_back({t, EventKind::PlugIn});
        }
        if (y.lpNorm<Eigen::Infinity>() > 1e9) break;  // divergence halt

        const Real err = std::max(r.err, 1e-10);
        Real fac = kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
        fac = std::clamp(fac, 0.2, just_rejected ? 1.0 : 5.0);
        h *= fac;
        err_prev = err;
        just_rejected = false;
    }
    return series;
}

TrajectoryMetrics classify(const TimeSeries& series, const StateLayout& layout,
                           Real target_v_l, Real band_frac, Real hold_frac) {
    if (series.empty()) throw EmptySeries("classify: empty time series");
    TrajectoryMetrics m;
    Real t_plug = series.times.front();
    for (const auto& e : series.events)
        if (e.kind == EventKind::PlugIn) t_plug = e.time;

    const Real t_end = series.times.back();
    const Real band = band_frac * std::abs(target_v_l);
    const Real hold_start = t_end - hold_frac * (t_end - t_plug);

    m.steady_value = series.states.back()[layout.vl()];
    bool diverged = false;
    bool held = true;
    Real last_out = t_plug;
    Real overshoot = 0.0;
    for (size_t k = 0; k < series.times.size(); ++k) {
        const Real v = series.states[k][layout.vl()];
        if (!series.states[k].allFinite() || std::abs(v) > 100.0 * std::abs(target_v_l))
            diverged = true;
        if (series.times[k] >= t_plug)
            overshoot = std::max(overshoot, std::abs(v - target_v_l));
        const bool in_band = std::abs(v - target_v_l) <= band;
        if (!in_band) last_out = series.times[k];
        if (series.times[k] >= hold_start && !in_band) held = false;
    }
    m.overshoot = overshoot;
    m.settling_time = held ? std::max(last_out, t_plug) : t_end;
    m.verdict = diverged ? Verdict::Diverged : (held ? Verdict::Stable : Verdict::Oscillating);
    return m;
}

void write_csv(std::ostream& os, const TimeSeries& series, const GridSpec& grid) {
    const StateLayout layout(grid);
    os << "t";
    for (int i = 0; i < layout.n; ++i)
        if (layout.iq_index[i] >= 0) os << ",i_q_" << (i + 1);
    for (int i = 0; i < layout.n; ++i) os << ",i_t_" << (i + 1);
    for (int i = 0; i < layout.n; ++i) os << ",v_c_" << (i + 1);
    os << ",v_l\n";
    char buf[64];
    auto emit = [&](Real v) {
        std::snprintf(buf, sizeof(buf), "%.15g", v);
        os << buf;
    };
    for (size_t k = 0; k < series.times.size(); ++k) {
        emit(series.times[k]);
        const VecX& x = series.states[k];
        for (int j = 0; j < x.size(); ++j) {
            os << ',';
            emit(x[j]);
        }
        os << '\n';
    }
    for (const auto& e : series.events) {
        os << "# event,";
        emit(e.time);
        os << ',' << to_string(e.kind) << '\n';
    }
}

}  // namespace mpstab
