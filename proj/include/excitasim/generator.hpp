#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "excitasim/errors.hpp"

namespace excitasim {

/// Complex admittance Y = g + jb in per unit.
struct ComplexAdmittance {
    double g = 0.0;
    double b = 0.0;
};

/// Series transmission line r_e + j x_e in per unit.
struct LineParams {
    double r_e = 0.02;
    double x_e = 0.4;

    void validate() const {
        if (!(r_e >= 0.0)) throw ValidationError("line: r_e >= 0 violated");
        if (!(r_e * r_e + x_e * x_e > 0.0)) throw ValidationError("line: r_e^2 + x_e^2 > 0 violated");
    }
};

/// Admittance of a series impedance: 1/(r + jx) = (r - jx)/(r^2 + x^2).
inline ComplexAdmittance line_admittance(const LineParams& lp) {
    const double d = lp.r_e * lp.r_e + lp.x_e * lp.x_e;
    return {lp.r_e / d, -lp.x_e / d};
}

/// Quadripole admittances seen from the generator terminals.
/// g1,b1: own admittance; g2,b2: transfer admittance toward the bus.
struct NetworkAdmittance {
    double g1 = 0.0;
    double b1 = 0.0;
    double g2 = 0.0;
    double b2 = 0.0;
};

/// Y1 = Y_line + Y_load, Y2 = -Y_line.
inline NetworkAdmittance admittances_from_line_and_load(const ComplexAdmittance& y_line,
                                                        const ComplexAdmittance& y_load) {
    return {y_line.g + y_load.g, y_line.b + y_load.b, -y_line.g, -y_line.b};
}

/// Per-unit machine constants of a round-rotor synchronous generator
/// on an infinite bus. Defaults are an illustrative typical data set.
struct GeneratorParams {
    double x_d = 1.81;    ///< direct synchronous reactance
    double x_q = 1.76;    ///< quadrature synchronous reactance
    double x_d_t = 0.3;   ///< direct transient reactance
    double x_q_t = 0.65;  ///< quadrature transient reactance (unused by the equations)
    double x_d_st = 0.23; ///< direct subtransient reactance
    double x_q_st = 0.25; ///< quadrature subtransient reactance
    double T_d0_t = 8.0;  ///< d-axis transient open-circuit time constant [s]
    double T_d0_st = 0.03;
    double T_q0_st = 0.07;
    double T_ex = 0.05;   ///< excitation time constant [s]
    double M = 7.0;       ///< inertia coefficient
    double k_d = 10.0;    ///< damping coefficient
    double r_a = 0.003;   ///< armature resistance
    double omega_0 = 2.0 * std::numbers::pi * 50.0; ///< synchronous speed [rad/s]
    double v_b = 1.0;     ///< infinite-bus voltage

    void validate() const {
        if (!(x_d >= x_d_t && x_d_t >= x_d_st && x_d_st > 0.0))
            throw ValidationError("generator: x_d >= x_d_t >= x_d_st > 0 violated");
        if (!(x_q >= x_q_st && x_q_st > 0.0))
            throw ValidationError("generator: x_q >= x_q_st > 0 violated");
        if (!(T_d0_t > T_d0_st && T_d0_st > 0.0))
            throw ValidationError("generator: T_d0_t > T_d0_st > 0 violated");
        if (!(T_q0_st > 0.0)) throw ValidationError("generator: T_q0_st > 0 violated");
        if (!(T_ex > 0.0)) throw ValidationError("generator: T_ex > 0 violated");
        if (!(M > 0.0)) throw ValidationError("generator: M > 0 violated");
        if (!(omega_0 > 0.0)) throw ValidationError("generator: omega_0 > 0 violated");
        if (!(v_b > 0.0)) throw ValidationError("generator: v_b > 0 violated");
        if (!(r_a >= 0.0)) throw ValidationError("generator: r_a >= 0 violated");
    }
};

/// Dynamic states of the 6th-order model.
struct GeneratorState {
    double delta = 0.0;  ///< rotor angle [rad]
    double s = 0.0;      ///< slip
    double e_q_t = 0.0;  ///< quadrature transient voltage
    double e_q_st = 0.0; ///< quadrature subtransient voltage
    double e_d_st = 0.0; ///< direct subtransient voltage
    double v_f = 0.0;    ///< field voltage
};

/// Dynamic states of the reduced 4th-order model.
struct ReducedState {
    double delta = 0.0;
    double s = 0.0;
    double e_q_t = 0.0;
    double v_f = 0.0;
};

/// Held plant inputs.
struct MechanicalInput {
    double t_m = 0.0; ///< mechanical torque
    double u = 0.0;   ///< excitation control input
};

/// Result of the algebraic stator/network solve.
struct AlgebraicOutputs {
    double i_d = 0.0;
    double i_q = 0.0;
    double v_d = 0.0;
    double v_q = 0.0;
    double t_e = 0.0;
    double v_t = 0.0;
};

namespace detail {

// Shared network rows, the d-q projection of I = Y1 V + Y2 V_b with
// V = v_d + j v_q and V_b = v_b (sin d + j cos d):
//   i_d - g1 v_d + b1 v_q = g2 vb sin(d) - b2 vb cos(d)
//   i_q - b1 v_d - g1 v_q = g2 vb cos(d) + b2 vb sin(d)
// Unknown ordering: (i_d, i_q, v_d, v_q).
inline void fill_network_rows(Eigen::Matrix4d& a, Eigen::Vector4d& rhs, double delta,
                              const NetworkAdmittance& n, double v_b) {
    const double sd = std::sin(delta);
    const double cd = std::cos(delta);
    a.row(2) << 1.0, 0.0, -n.g1, n.b1;
    a.row(3) << 0.0, 1.0, -n.b1, -n.g1;
    rhs(2) = n.g2 * v_b * sd - n.b2 * v_b * cd;
    rhs(3) = n.g2 * v_b * cd + n.b2 * v_b * sd;
}

inline Eigen::Vector4d solve_checked(const Eigen::Matrix4d& a, const Eigen::Vector4d& rhs) {
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
    if (std::abs(lu.determinant()) < 1e-12) throw SingularNetwork{};
    return lu.solve(rhs);
}

} // namespace detail

/// Stator/network solve for the full model: subtransient voltage equations
/// joined with the quadripole current equations as one 4x4 linear system.
inline AlgebraicOutputs solve_network_full(double delta, double e_d_st, double e_q_st,
                                           const GeneratorParams& p, const NetworkAdmittance& n) {
    Eigen::Matrix4d a;
    Eigen::Vector4d rhs;
    a.row(0) << p.r_a, -p.x_q_st, 1.0, 0.0;
    a.row(1) << p.x_d_st, p.r_a, 0.0, 1.0;
    rhs(0) = e_d_st;
    rhs(1) = e_q_st;
    detail::fill_network_rows(a, rhs, delta, n, p.v_b);

    const Eigen::Vector4d x = detail::solve_checked(a, rhs);
    AlgebraicOutputs out{x(0), x(1), x(2), x(3), 0.0, 0.0};
    out.t_e = e_d_st * out.i_d + e_q_st * out.i_q - (p.x_d_st - p.x_q_st) * out.i_d * out.i_q;
    out.v_t = std::hypot(out.v_d, out.v_q);
    return out;
}

/// Stator/network solve for the reduced model (transient voltage only).
inline AlgebraicOutputs solve_network_reduced(double delta, double e_q_t,
                                              const GeneratorParams& p, const NetworkAdmittance& n) {
    Eigen::Matrix4d a;
    Eigen::Vector4d rhs;
    a.row(0) << p.r_a, -p.x_q, 1.0, 0.0;
    a.row(1) << p.x_d_t, p.r_a, 0.0, 1.0;
    rhs(0) = 0.0;
    rhs(1) = e_q_t;
    detail::fill_network_rows(a, rhs, delta, n, p.v_b);

    const Eigen::Vector4d x = detail::solve_checked(a, rhs);
    AlgebraicOutputs out{x(0), x(1), x(2), x(3), 0.0, 0.0};
    out.t_e = e_q_t * out.i_q - (p.x_d_t - p.x_q) * out.i_d * out.i_q;
    out.v_t = std::hypot(out.v_d, out.v_q);
    return out;
}

/// Voltage form of the network equations: (i_d, i_q) -> (v_d, v_q).
/// Kept separate from the joint solve; divides by g1^2 + b1^2.
inline std::array<double, 2> invert_network(double i_d, double i_q, double delta,
                                            const NetworkAdmittance& n, double v_b) {
    const double m = n.g1 * n.g1 + n.b1 * n.b1;
    if (m <= 1e-12) throw DegenerateOwnAdmittance{};
    const double sd = std::sin(delta);
    const double cd = std::cos(delta);
    const double gg_bb = n.g1 * n.g2 + n.b1 * n.b2;
    const double bg_gb = n.b1 * n.g2 - n.b2 * n.g1;
    const double v_d = (i_d * n.g1 + i_q * n.b1 + gg_bb * v_b * sd + bg_gb * v_b * cd) / m;
    const double v_q = (i_q * n.g1 - i_d * n.b1 - bg_gb * v_b * sd + gg_bb * v_b * cd) / m;
    return {v_d, v_q};
}

/// Time derivatives of the 6th-order model.
inline std::array<double, 6> derivatives_full(const GeneratorState& st, const MechanicalInput& in,
                                              const GeneratorParams& p, const NetworkAdmittance& n) {
    const AlgebraicOutputs out = solve_network_full(st.delta, st.e_d_st, st.e_q_st, p, n);
    return {
        p.omega_0 * st.s,
        (-p.k_d * st.s + in.t_m - out.t_e) / p.M,
        (st.v_f - (p.x_d - p.x_d_t) * out.i_d - st.e_q_t) / p.T_d0_t,
        (st.e_q_t - (p.x_d_t - p.x_d_st) * out.i_d - st.e_q_st) / p.T_d0_st,
        ((p.x_q - p.x_q_st) * out.i_q - st.e_d_st) / p.T_q0_st,
        (in.u - st.v_f) / p.T_ex,
    };
}

/// Time derivatives of the reduced 4th-order model.
inline std::array<double, 4> derivatives_reduced(const ReducedState& st, const MechanicalInput& in,
                                                 const GeneratorParams& p, const NetworkAdmittance& n) {
    const AlgebraicOutputs out = solve_network_reduced(st.delta, st.e_q_t, p, n);
    return {
        p.omega_0 * st.s,
        (-p.k_d * st.s + in.t_m - out.t_e) / p.M,
        (st.v_f - (p.x_d - p.x_d_t) * out.i_d - st.e_q_t) / p.T_d0_t,
        (in.u - st.v_f) / p.T_ex,
    };
}

enum class ModelKind { Full, Reduced };

/// Steady-state operating point. For ModelKind::Reduced the subtransient
/// states carry their algebraically consistent values.
struct Equilibrium {
    GeneratorState state;
    MechanicalInput input;
    AlgebraicOutputs outputs;
};

namespace detail {

// Damped Newton with central-difference Jacobian. Steps are halved up to
// 8 times until the residual norm decreases; converges at inf-norm 1e-10.
template <typename Residual>
inline Eigen::VectorXd newton_solve(Residual&& residual, Eigen::VectorXd x) {
    constexpr int kMaxIter = 100;
    constexpr double kTol = 1e-10;
    const auto n = x.size();

    Eigen::VectorXd r = residual(x);
    for (int iter = 0; iter < kMaxIter; ++iter) {
        if (r.lpNorm<Eigen::Infinity>() <= kTol) return x;

        Eigen::MatrixXd jac(r.size(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            // Power-of-two step near 1e-6 keeps exactly-linear rows exact.
            const double h = std::exp2(std::round(std::log2(1e-6 * std::max(1.0, std::abs(x(j))))));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
        }

        // Rank-revealing minimum-norm solve: directions the residual does
        // not depend on (e.g. delta at open circuit) are left untouched.
        Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-r);
        if (!step.allFinite()) throw SingularJacobian{};

        const double r0 = r.norm();
        double scale = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings <= 8; ++halvings) {
            Eigen::VectorXd xn = x + scale * step;
            Eigen::VectorXd rn = residual(xn);
            if (rn.allFinite() && rn.norm() < r0) {
                x = std::move(xn);
                r = std::move(rn);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            // Accept the full step anyway; stagnation is caught by the
            // iteration cap.
            x += step;
            r = residual(x);
        }
    }
    if (r.lpNorm<Eigen::Infinity>() <= kTol) return x;
    throw NoConvergence("equilibrium Newton iteration did not converge");
}

} // namespace detail

/// Solves for the operating point with terminal voltage target_vt and
/// electric torque target_te. At the solution s=0, u=v_f and T_m balances
/// the torque equation.
inline Equilibrium find_equilibrium(double target_vt, double target_te, const GeneratorParams& p,
                                    const NetworkAdmittance& n, ModelKind model) {
    if (!(target_vt > 0.0)) throw NoConvergence("equilibrium target_vt must be positive");

    if (model == ModelKind::Full) {
        // Unknowns: delta, e_q_t, e_q_st, e_d_st, v_f.
        auto residual = [&](const Eigen::VectorXd& x) {
            const AlgebraicOutputs out = solve_network_full(x(0), x(3), x(2), p, n);
            Eigen::VectorXd r(5);
            r(0) = x(4) - (p.x_d - p.x_d_t) * out.i_d - x(1);
            r(1) = x(1) - (p.x_d_t - p.x_d_st) * out.i_d - x(2);
            r(2) = (p.x_q - p.x_q_st) * out.i_q - x(3);
            r(3) = out.v_t - target_vt;
            r(4) = out.t_e - target_te;
            return r;
        };
        Eigen::VectorXd x0(5);
        x0 << 0.5, target_vt, target_vt, 0.0, target_vt;
        const Eigen::VectorXd x = detail::newton_solve(residual, x0);

        Equilibrium eq;
        eq.state = {x(0), 0.0, x(1), x(2), x(3), x(4)};
        eq.outputs = solve_network_full(x(0), x(3), x(2), p, n);
        eq.input = {eq.outputs.t_e, x(4)};
        return eq;
    }

    // Reduced: unknowns delta, e_q_t, v_f.
    auto residual = [&](const Eigen::VectorXd& x) {
        const AlgebraicOutputs out = solve_network_reduced(x(0), x(1), p, n);
        Eigen::VectorXd r(3);
        r(0) = x(2) - (p.x_d - p.x_d_t) * out.i_d - x(1);
        r(1) = out.v_t - target_vt;
        r(2) = out.t_e - target_te;
        return r;
    };
    Eigen::VectorXd x0(3);
    x0 << 0.5, target_vt, target_vt;
    const Eigen::VectorXd x = detail::newton_solve(residual, x0);

    Equilibrium eq;
    eq.outputs = solve_network_reduced(x(0), x(1), p, n);
    eq.state = {x(0), 0.0, x(1),
                x(1) - (p.x_d_t - p.x_d_st) * eq.outputs.i_d,
                (p.x_q - p.x_q_st) * eq.outputs.i_q, x(2)};
    eq.input = {eq.outputs.t_e, x(2)};
    return eq;
}

inline ReducedState reduced_from(const GeneratorState& st) {
    return {st.delta, st.s, st.e_q_t, st.v_f};
}

} // namespace excitasim
