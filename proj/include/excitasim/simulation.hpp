#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <vector>

#include "excitasim/fuzzy_pi.hpp"
#include "excitasim/generator.hpp"
#include "excitasim/tuner.hpp"

namespace excitasim {

enum class EventKind {
    ReferenceStep,
    TorqueStep,
    OwnConductanceStep,
    OwnSusceptanceStep,
    TransferConductanceStep,
    TransferSusceptanceStep,
};

/// Additive step applied at a grid-snapped time.
struct ScenarioEvent {
    double time = 0.0;
    EventKind kind = EventKind::ReferenceStep;
    double magnitude = 0.0;
};

struct ScenarioConfig {
    double duration = 80.0;
    double h = 1e-3;   ///< integrator step
    double ts = 0.02;  ///< controller sample period
    ModelKind model = ModelKind::Full;
    bool adaptive = true;
    double fixed_c = 1.0; ///< used when adaptive == false
    double target_vt = 1.0;
    double target_te = 0.8;
    bool full_rate_logging = false;
    std::vector<ScenarioEvent> events;

    void validate() const {
        if (!(duration > 0.0)) throw ValidationError("scenario: duration > 0 violated");
        if (!(h > 0.0 && h <= ts)) throw ValidationError("scenario: 0 < h <= ts violated");
        const double ratio = ts / h;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw ValidationError("scenario: ts must be an integer multiple of h");
        for (const auto& ev : events)
            if (!(ev.time >= 0.0)) throw ValidationError("scenario: event time >= 0 violated");
    }
};

/// The study case: reference +0.05 p.u. at 20 s, mechanical torque
/// +0.2 p.u. at 40 s, own conductance +0.2 p.u. at 60 s.
inline ScenarioConfig paper_scenario() {
    ScenarioConfig sc;
    sc.duration = 80.0;
    sc.h = 1e-3;
    sc.ts = 0.02;
    sc.model = ModelKind::Full;
    sc.events = {
        {20.0, EventKind::ReferenceStep, 0.05},
        {40.0, EventKind::TorqueStep, 0.2},
        {60.0, EventKind::OwnConductanceStep, 0.2},
    };
    return sc;
}

/// One logged record. Quantities are deviations from the equilibrium
/// except delta and v_f, which are absolute.
struct Sample {
    double t = 0.0;
    double reference = 0.0;
    double vt_dev = 0.0;
    double e = 0.0;
    double u = 0.0;   ///< controller output (deviation added to u0)
    double v_f = 0.0;
    double delta = 0.0;
    double slip = 0.0;
    double t_e = 0.0; ///< torque deviation
    double c = 0.0;
};

struct TimeSeries {
    std::vector<Sample> samples;
};

struct Metrics {
    double iae = 0.0;
    double ise = 0.0;
    double overshoot = 0.0;     ///< fraction of the most recent reference step
    double settling_time = 0.0; ///< from window start to the last band exit
    double max_abs_error = 0.0;
    bool settled = true;
};

/// Per-control-sample observation hook: the raw plant state (model field
/// order, absolute values) and the algebraic solve at that instant.
struct SampleProbe {
    double t = 0.0;
    std::vector<double> state;
    AlgebraicOutputs outputs;
};
using SampleObserver = std::function<void(const SampleProbe&)>;

namespace detail {

template <int N>
struct PlantOps;

template <>
struct PlantOps<6> {
    using State = GeneratorState;
    static std::array<double, 6> deriv(const State& st, const MechanicalInput& in,
                                       const GeneratorParams& p, const NetworkAdmittance& n) {
        return derivatives_full(st, in, p, n);
    }
    static AlgebraicOutputs solve(const State& st, const GeneratorParams& p,
                                  const NetworkAdmittance& n) {
        return solve_network_full(st.delta, st.e_d_st, st.e_q_st, p, n);
    }
    static State advance(const State& x, const std::array<double, 6>& d, double dt) {
        return {x.delta + dt * d[0], x.s + dt * d[1],     x.e_q_t + dt * d[2],
                x.e_q_st + dt * d[3], x.e_d_st + dt * d[4], x.v_f + dt * d[5]};
    }
    static std::array<double, 6> fields(const State& x) {
        return {x.delta, x.s, x.e_q_t, x.e_q_st, x.e_d_st, x.v_f};
    }
};

template <>
struct PlantOps<4> {
    using State = ReducedState;
    static std::array<double, 4> deriv(const State& st, const MechanicalInput& in,
                                       const GeneratorParams& p, const NetworkAdmittance& n) {
        return derivatives_reduced(st, in, p, n);
    }
    static AlgebraicOutputs solve(const State& st, const GeneratorParams& p,
                                  const NetworkAdmittance& n) {
        return solve_network_reduced(st.delta, st.e_q_t, p, n);
    }
    static State advance(const State& x, const std::array<double, 4>& d, double dt) {
        return {x.delta + dt * d[0], x.s + dt * d[1], x.e_q_t + dt * d[2], x.v_f + dt * d[3]};
    }
    static std::array<double, 4> fields(const State& x) {
        return {x.delta, x.s, x.e_q_t, x.v_f};
    }
};

template <int N>
typename PlantOps<N>::State rk4_step(const typename PlantOps<N>::State& x,
                                     const MechanicalInput& in, const GeneratorParams& p,
                                     const NetworkAdmittance& n, double h) {
    using Ops = PlantOps<N>;
    const auto k1 = Ops::deriv(x, in, p, n);
    const auto k2 = Ops::deriv(Ops::advance(x, k1, h / 2), in, p, n);
    const auto k3 = Ops::deriv(Ops::advance(x, k2, h / 2), in, p, n);
    const auto k4 = Ops::deriv(Ops::advance(x, k3, h), in, p, n);
    std::array<double, N> d{};
    for (int c = 0; c < N; ++c) d[c] = (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]) / 6.0;
    return Ops::advance(x, d, h);
}

template <int N>
TimeSeries run_loop(const ScenarioConfig& sc, const GeneratorParams& p, const NetworkAdmittance& net,
                    const FuzzyPIConfig& ctrl_cfg, const TunerConfig& tuner_cfg,
                    typename PlantOps<N>::State state, const Equilibrium& eq,
                    const SampleObserver& observer) {
    using Ops = PlantOps<N>;

    NetworkAdmittance net_run = net;
    double t_m = eq.input.t_m;
    double u_plant = eq.input.u;
    double reference = 0.0;
    double c = sc.adaptive ? tuner_cfg.c1 : sc.fixed_c;

    ControllerState ctrl;
    TunerState tuner;

    const long n_steps = std::lround(sc.duration / sc.h);
    const long n_sub = std::lround(sc.ts / sc.h);

    // Events snapped to the integration grid.
    struct Pending { long step; EventKind kind; double magnitude; };
    std::vector<Pending> pending;
    pending.reserve(sc.events.size());
    for (const auto& ev : sc.events)
        pending.push_back({std::lround(ev.time / sc.h), ev.kind, ev.magnitude});
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) { return a.step < b.step; });
    size_t next_event = 0;

    TimeSeries ts;
    ts.samples.reserve(static_cast<size_t>(n_steps / n_sub) + 2);

    for (long i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * sc.h;

        while (next_event < pending.size() && pending[next_event].step <= i) {
            const auto& ev = pending[next_event++];
            switch (ev.kind) {
                case EventKind::ReferenceStep: reference += ev.magnitude; break;
                case EventKind::TorqueStep: t_m += ev.magnitude; break;
                case EventKind::OwnConductanceStep: net_run.g1 += ev.magnitude; break;
                case EventKind::OwnSusceptanceStep: net_run.b1 += ev.magnitude; break;
                case EventKind::TransferConductanceStep: net_run.g2 += ev.magnitude; break;
                case EventKind::TransferSusceptanceStep: net_run.b2 += ev.magnitude; break;
            }
        }

        const bool control_sample = (i % n_sub) == 0;
        if (control_sample || sc.full_rate_logging) {
            const AlgebraicOutputs out = Ops::solve(state, p, net_run);
            const double vt_dev = out.v_t - eq.outputs.v_t;
            const double e = reference - vt_dev;
            double u_ctrl = u_plant - eq.input.u;
            if (control_sample) {
                c = sc.adaptive ? tuner_step(e, tuner_cfg, tuner) : sc.fixed_c;
                u_ctrl = controller_step(e, c, ctrl_cfg, ctrl);
                u_plant = eq.input.u + u_ctrl;
            }
            const auto f = Ops::fields(state);
            ts.samples.push_back({t, reference, vt_dev, e, u_ctrl, f[N - 1], f[0], f[1],
                                  out.t_e - eq.outputs.t_e, c});
            if (control_sample && observer)
                observer({t, std::vector<double>(f.begin(), f.end()), out});
        }

        if (i == n_steps) break;
        state = rk4_step<N>(state, {t_m, u_plant}, p, net_run, sc.h);

        if (std::abs(state.delta) > std::numbers::pi) throw LossOfSynchronism(t + sc.h);
        for (double v : Ops::fields(state))
            if (!(std::abs(v) <= 1e3)) throw Unstable(t + sc.h);
    }
    return ts;
}

} // namespace detail

/// Closed-loop run: RK4 plant, sampled fuzzy PI with zero-order hold,
/// optional hysteresis tuner, additive events.
inline TimeSeries run_closed_loop(const ScenarioConfig& sc, const GeneratorParams& p,
                                  const NetworkAdmittance& net, const FuzzyPIConfig& ctrl_cfg,
                                  const TunerConfig& tuner_cfg,
                                  const SampleObserver& observer = nullptr) {
    sc.validate();
    const Equilibrium eq = find_equilibrium(sc.target_vt, sc.target_te, p, net, sc.model);
    if (sc.model == ModelKind::Full)
        return detail::run_loop<6>(sc, p, net, ctrl_cfg, tuner_cfg, eq.state, eq, observer);
    return detail::run_loop<4>(sc, p, net, ctrl_cfg, tuner_cfg, reduced_from(eq.state), eq, observer);
}

/// Error metrics over [t_start, t_end] by the rectangle rule at the
/// sample spacing.
inline Metrics compute_metrics(const TimeSeries& ts, double t_start, double t_end, double band) {
    std::vector<size_t> idx;
    for (size_t k = 0; k < ts.samples.size(); ++k) {
        const double t = ts.samples[k].t;
        if (t >= t_start - 1e-12 && t <= t_end + 1e-12) idx.push_back(k);
    }
    if (idx.empty()) throw EmptyWindow{};

    const double dt = idx.size() > 1
                          ? ts.samples[idx[1]].t - ts.samples[idx[0]].t
                          : 0.0;

    Metrics m;
    std::optional<size_t> step_at;
    double step_mag = 0.0;
    double last_outside = -1.0;
    for (size_t k : idx) {
        const Sample& s = ts.samples[k];
        m.iae += std::abs(s.e) * dt;
        m.ise += s.e * s.e * dt;
        m.max_abs_error = std::max(m.max_abs_error, std::abs(s.e));
        if (std::abs(s.e) > band) last_outside = s.t;
        if (k > 0 && ts.samples[k].reference != ts.samples[k - 1].reference) {
            step_at = k;
            step_mag = ts.samples[k].reference - ts.samples[k - 1].reference;
        }
    }

    if (step_at && step_mag != 0.0) {
        const double sign = step_mag > 0.0 ? 1.0 : -1.0;
        for (size_t k : idx) {
            if (k < *step_at) continue;
            const Sample& s = ts.samples[k];
            m.overshoot = std::max(m.overshoot, sign * (s.vt_dev - s.reference) / std::abs(step_mag));
        }
        m.overshoot = std::max(m.overshoot, 0.0);
    }

    if (last_outside >= 0.0) {
        m.settling_time = last_outside - t_start;
        m.settled = std::abs(ts.samples[idx.back()].e) <= band;
    }
    return m;
}

struct WindowMetrics {
    double t_start = 0.0;
    double t_end = 0.0;
    Metrics adaptive;
    Metrics fixed;
};

struct ComparisonResult {
    TimeSeries adaptive;
    TimeSeries fixed;
    std::vector<WindowMetrics> windows;
};

/// Runs the identical scenario with the tuner on and off (fixed c = c1)
/// and computes per-event-window metrics for both traces.
inline ComparisonResult compare_adaptive(const ScenarioConfig& sc, const GeneratorParams& p,
                                         const NetworkAdmittance& net, const FuzzyPIConfig& ctrl_cfg,
                                         const TunerConfig& tuner_cfg, double band = 0.01,
                                         bool parallel = true) {
    ScenarioConfig sa = sc;
    sa.adaptive = true;
    ScenarioConfig sf = sc;
    sf.adaptive = false;
    sf.fixed_c = tuner_cfg.c1;

    ComparisonResult res;
    if (parallel) {
        auto fut = std::async(std::launch::async, [&] {
            return run_closed_loop(sf, p, net, ctrl_cfg, tuner_cfg);
        });
        res.adaptive = run_closed_loop(sa, p, net, ctrl_cfg, tuner_cfg);
        res.fixed = fut.get();
    } else {
        res.adaptive = run_closed_loop(sa, p, net, ctrl_cfg, tuner_cfg);
        res.fixed = run_closed_loop(sf, p, net, ctrl_cfg, tuner_cfg);
    }

    std::vector<double> edges;
    for (const auto& ev : sc.events)
        if (ev.time < sc.duration) edges.push_back(ev.time);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (size_t k = 0; k < edges.size(); ++k) {
        WindowMetrics wm;
        wm.t_start = edges[k];
        wm.t_end = (k + 1 < edges.size()) ? std::min(edges[k + 1], sc.duration) : sc.duration;
        wm.adaptive = compute_metrics(res.adaptive, wm.t_start, wm.t_end, band);
        wm.fixed = compute_metrics(res.fixed, wm.t_start, wm.t_end, band);
        res.windows.push_back(wm);
    }
    return res;
}

} // namespace excitasim
