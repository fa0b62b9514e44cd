#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "excitasim/generator.hpp"

namespace excitasim {

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series (relative tolerance 1e-12).
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m, double tol = 1e-12) {
    const Eigen::Index n = m.rows();
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    Eigen::MatrixXd a = m;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
        a /= std::exp2(squarings);
    }

    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 40; ++k) {
        term = (a * term) / static_cast<double>(k);
        result += term;
        if (term.norm() <= tol * result.norm()) break;
    }
    for (int i = 0; i < squarings; ++i) result *= result;
    return result;
}

/// Linearized reduced model around an equilibrium. State order
/// (delta, s, e_q_t, v_f); input u; output v_t deviation.
struct ContinuousLinearModel {
    Eigen::Matrix4d a;
    Eigen::Vector4d b;
    Eigen::RowVector4d c;
    double d = 0.0;
};

namespace detail {

// Power-of-two central-difference step near 1e-6 relative; keeps the
// exactly-linear rows of the Jacobian exact in floating point.
inline double fd_step(double x) {
    return std::exp2(std::round(std::log2(1e-6 * std::max(1.0, std::abs(x)))));
}

} // namespace detail

/// Central-difference Jacobian of the reduced dynamics plus the v_t
/// output row. Feedthrough is identically zero (v_t has no direct u path).
inline ContinuousLinearModel jacobian_reduced(const ReducedState& eq_state,
                                              const MechanicalInput& eq_input,
                                              const GeneratorParams& p,
                                              const NetworkAdmittance& n) {
    ContinuousLinearModel lm;

    const std::array<double, 4> x0{eq_state.delta, eq_state.s, eq_state.e_q_t, eq_state.v_f};
    auto deriv_at = [&](const std::array<double, 4>& x) {
        return derivatives_reduced({x[0], x[1], x[2], x[3]}, eq_input, p, n);
    };
    auto vt_at = [&](const std::array<double, 4>& x) {
        return solve_network_reduced(x[0], x[2], p, n).v_t;
    };

    for (int j = 0; j < 4; ++j) {
        const double h = detail::fd_step(x0[j]);
        std::array<double, 4> xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        const auto dp = deriv_at(xp);
        const auto dm = deriv_at(xm);
        for (int i = 0; i < 4; ++i) lm.a(i, j) = (dp[i] - dm[i]) / (2.0 * h);
        lm.c(j) = (vt_at(xp) - vt_at(xm)) / (2.0 * h);
    }

    const double hu = detail::fd_step(eq_input.u);
    const MechanicalInput up{eq_input.t_m, eq_input.u + hu};
    const MechanicalInput um{eq_input.t_m, eq_input.u - hu};
    const auto dp = derivatives_reduced(eq_state, up, p, n);
    const auto dm = derivatives_reduced(eq_state, um, p, n);
    for (int i = 0; i < 4; ++i) lm.b(i) = (dp[i] - dm[i]) / (2.0 * hu);

    lm.d = 0.0;
    return lm;
}

struct DiscreteStateSpace {
    Eigen::Matrix4d a_d;
    Eigen::Vector4d b_d;
};

/// Exact zero-order-hold discretization via the exponential of the
/// augmented [[A, B], [0, 0]] block.
inline DiscreteStateSpace discretize_zoh(const ContinuousLinearModel& clm, double ts) {
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(5, 5);
    aug.topLeftCorner<4, 4>() = clm.a;
    aug.topRightCorner<4, 1>() = clm.b;
    const Eigen::MatrixXd e = expm(aug * ts);
    return {e.topLeftCorner<4, 4>(), e.topRightCorner<4, 1>()};
}

/// Discrete 4th-order transfer function in z^{-1}:
///   H(z^{-1}) = z^{-delay} (b0 + b1 z^{-1} + b2 z^{-2} + b3 z^{-3})
///               / (1 + a1 z^{-1} + a2 z^{-2} + a3 z^{-3} + a4 z^{-4})
struct DiscreteTF {
    std::array<double, 4> b_coeffs{};
    std::array<double, 4> a_coeffs{};
    double ts = 0.02;
    int delay = 1; ///< pure input delay in samples
};

/// Faddeev-LeVerrier recursion: denominator is the characteristic
/// polynomial of a_d, numerator c * adj(zI - a_d) * b_d; the natural
/// one-sample delay of the strictly proper system goes to the delay flag.
inline DiscreteTF tf_from_state_space(const Eigen::Matrix4d& a_d, const Eigen::Vector4d& b_d,
                                      const Eigen::RowVector4d& c_row, double ts) {
    DiscreteTF tf;
    tf.ts = ts;
    tf.delay = 1;

    Eigen::Matrix4d n_k = Eigen::Matrix4d::Identity();
    for (int k = 0; k < 4; ++k) {
        tf.b_coeffs[k] = c_row * n_k * b_d;
        const Eigen::Matrix4d an = a_d * n_k;
        tf.a_coeffs[k] = -an.trace() / static_cast<double>(k + 1);
        n_k = an + tf.a_coeffs[k] * Eigen::Matrix4d::Identity();
    }
    return tf;
}

/// Difference-equation simulation of the transfer function; y and u are
/// zero before sample 0.
inline std::vector<double> simulate_tf(const DiscreteTF& tf, std::span<const double> u) {
    std::vector<double> y(u.size(), 0.0);
    for (size_t k = 0; k < u.size(); ++k) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            if (k >= static_cast<size_t>(i + 1)) acc -= tf.a_coeffs[i] * y[k - i - 1];
            const size_t lag = static_cast<size_t>(tf.delay + i);
            if (k >= lag) acc += tf.b_coeffs[i] * u[k - lag];
        }
        y[k] = acc;
    }
    return y;
}

/// Discrepancy between the discrete TF step response and the reduced
/// nonlinear model for a small excitation step.
struct SmallSignalReport {
    double max_discrepancy = 0.0;
    double rms_discrepancy = 0.0;
    double peak_response = 0.0; ///< peak |v_t deviation| of the nonlinear run
};

inline SmallSignalReport validate_small_signal(const DiscreteTF& tf, const Equilibrium& eq,
                                               const GeneratorParams& p, const NetworkAdmittance& n,
                                               double amplitude = 1e-3, double duration = 10.0,
                                               double h = 1e-3) {
    const int substeps = static_cast<int>(std::lround(tf.ts / h));
    const int samples = static_cast<int>(std::lround(duration / tf.ts));

    // Nonlinear reduced run with a held u step, sampled at ts.
    ReducedState st = reduced_from(eq.state);
    const MechanicalInput in{eq.input.t_m, eq.input.u + amplitude};
    std::vector<double> vt_nl;
    vt_nl.reserve(static_cast<size_t>(samples) + 1);
    vt_nl.push_back(0.0);
    for (int k = 0; k < samples; ++k) {
        for (int i = 0; i < substeps; ++i) {
            auto f = [&](const ReducedState& x) { return derivatives_reduced(x, in, p, n); };
            const auto k1 = f(st);
            auto advance = [&](const ReducedState& x, const std::array<double, 4>& d, double dt) {
                return ReducedState{x.delta + dt * d[0], x.s + dt * d[1], x.e_q_t + dt * d[2],
                                    x.v_f + dt * d[3]};
            };
            const auto k2 = f(advance(st, k1, h / 2));
            const auto k3 = f(advance(st, k2, h / 2));
            const auto k4 = f(advance(st, k3, h));
            std::array<double, 4> d{};
            for (int c = 0; c < 4; ++c) d[c] = (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]) / 6.0;
            st = advance(st, d, h);
        }
        vt_nl.push_back(solve_network_reduced(st.delta, st.e_q_t, p, n).v_t - eq.outputs.v_t);
    }

    const std::vector<double> u(vt_nl.size(), amplitude);
    const std::vector<double> vt_lin = simulate_tf(tf, u);

    SmallSignalReport rep;
    double sq = 0.0;
    for (size_t k = 0; k < vt_nl.size(); ++k) {
        const double d = vt_nl[k] - vt_lin[k];
        rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(d));
        rep.peak_response = std::max(rep.peak_response, std::abs(vt_nl[k]));
        sq += d * d;
    }
    rep.rms_discrepancy = std::sqrt(sq / static_cast<double>(vt_nl.size()));
    return rep;
}

} // namespace excitasim
