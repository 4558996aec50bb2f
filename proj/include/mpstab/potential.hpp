#pragma once

#include "mpstab/common.hpp"
#include "mpstab/dynamics.hpp"
#include "mpstab/grid.hpp"

namespace mpstab {

/// Which segment of the CPL law to evaluate on. Auto picks by v_l against
/// v_min; the explicit values give the one-sided limits at the joint.
enum class CplRegion { Auto, Hyperbola, ConstCurrent };

/// Matrices and scalar parts of the mixed potential
///   P(i, v) = -1/2 (i, A i) + B(v) + (i, gamma v - alpha)
/// of the virtual-inductor-completed circuit. The current vector is
/// i = [I_p; I_q; I_t] (3N), the voltage vector v = [V_C; V_L] (N+1).
/// l_diag carries zeros in the first N slots (virtual inductors).
struct PotentialForm {
    int n = 0;           // branches
    VecX a_diag;         // 3N: R_p, R_q, R_t
    MatX gamma;          // 3N x (N+1)
    VecX alpha;          // 3N: -[V_ref; V_ref; 0]
    VecX l_diag;         // 3N: 0, L_q, L_t
    VecX c_diag;         // N+1: C_b, C_L
    VecX v_ref;          // N
    Real r_l = 0.0;
    CplParams cpl;

    int dim_i() const { return 3 * n; }
    int dim_v() const { return n + 1; }
    int dim() const { return dim_i() + dim_v(); }
};

/// Evaluation point in the completed-circuit coordinates.
struct PotentialPoint {
    VecX i;  // 3N
    VecX v;  // N+1

    /// Lift a dynamic state onto the constraint manifold of the virtual
    /// inductors: I_p = (V_ref - V_C) / R_p.
    static PotentialPoint from_state(const PotentialForm& form, const GridSpec& grid,
                                     const State& state);
};

/// Quadratic summary 1/2 x^T P2 x + P1^T x + P0 of a transformed potential
/// with sublinear remainder dropped, plus the smallest eigenvalue of P2.
struct QuadraticSummary {
    MatX p2;
    VecX p1;
    Real p0 = 0.0;
    Real lambda_min = 0.0;
};

/// Build the potential form of a grid. All branches must use the proposed
/// controller (the droop stage has no published potential).
PotentialForm assemble_forms(const GridSpec& grid);

/// Voltage part B(v): V_L^2/(2 r_l) plus the CPL segment term
/// (p_l ln(V_L/v_min) on the hyperbola, i_max (V_L - v_min) below).
Real b_value(const PotentialForm& form, Real v_l, CplRegion region = CplRegion::Auto);
Real b_slope(const PotentialForm& form, Real v_l, CplRegion region = CplRegion::Auto);
Real b_curvature(const PotentialForm& form, Real v_l, CplRegion region = CplRegion::Auto);

Real eval_P(const PotentialForm& form, const PotentialPoint& pt,
            CplRegion region = CplRegion::Auto);

struct Gradient {
    VecX d_i;  // 3N, volts
    VecX d_v;  // N+1, amps
    VecX stacked() const {
        VecX g(d_i.size() + d_v.size());
        g << d_i, d_v;
        return g;
    }
};

Gradient grad_P(const PotentialForm& form, const PotentialPoint& pt,
                CplRegion region = CplRegion::Auto);

/// Full Hessian [[-A, gamma], [gamma^T, d2B/dv2]]. Throws
/// NotTwiceDifferentiable exactly at v_l == v_min.
MatX hess_P(const PotentialForm& form, const PotentialPoint& pt);

struct Condition4Transform {
    Real p_star = 0.0;
    MatX hess_p_star;  // dim x dim
};

/// The lambda = 1, M = [[2A^-1, 0], [0, 0]] transform. Its Hessian
/// equals H + H M H everywhere, so at an equilibrium it reproduces the
/// closed-form blocks [[A, -gamma], [-gamma^T, d2B + 2 gamma^T A^-1 gamma]].
Condition4Transform transform_condition4(const PotentialForm& form, const PotentialPoint& pt);

/// Quadratic summary of the radial-unboundedness transform
///   P* = ((mu1 - mu2)/2) P + 1/2 (P_I, L^-1 P_I) + 1/2 (P_V, C^-1 P_V)
/// over the reduced coordinates (I_q, I_t, V_C, V_L); the virtual-inductor
/// rows are eliminated through their algebraic constraint, which moves the
/// (V_ref - V_C)^2 / (2 R_p) co-content into the voltage part. CPL terms
/// beyond the segment's asymptotic curvature are sublinear and dropped.
QuadraticSummary transform_unbounded(const PotentialForm& form, CplRegion region);

/// Shared low-level builder used by both the grid transform and the RLC
/// benchmark: potential parts given directly as matrices. qb_diag/qb_lin/b0
/// describe the quadratic, linear and constant parts of B(v).
QuadraticSummary radial_quadratic(const VecX& a_diag, const MatX& gamma, const VecX& alpha,
                                  const VecX& l_diag, const VecX& c_diag, const VecX& qb_diag,
                                  const VecX& qb_lin, Real b0);

}  // namespace mpstab
