#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "excitasim/errors.hpp"

namespace excitasim {

/// Hysteresis-relay thresholds and the two singleton-scale values.
struct TunerConfig {
    double alpha = 0.01;  ///< engage threshold
    double beta = 0.001;  ///< release threshold, small but nonzero
    double c1 = 1.0;      ///< nominal scale
    double c2 = 2.5;      ///< retuned scale

    void validate() const {
        if (!(beta > 0.0)) throw ValidationError("tuner: beta > 0 violated");
        if (!(beta < alpha)) throw ValidationError("tuner: beta < alpha violated");
        if (!(c1 > 0.0)) throw ValidationError("tuner: c1 > 0 violated");
        if (!(c2 > 0.0)) throw ValidationError("tuner: c2 > 0 violated");
    }
};

enum class TunerMode { Nominal, Retuned };

struct TunerState {
    TunerMode mode = TunerMode::Nominal;
};

/// Two-state relay: engage on |e| > alpha, release on |e| < beta, both
/// strict. The transition is evaluated before the scale is emitted.
inline double tuner_step(double e, const TunerConfig& cfg, TunerState& st) {
    const double mag = std::abs(e);
    if (st.mode == TunerMode::Nominal) {
        if (mag > cfg.alpha) st.mode = TunerMode::Retuned;
    } else {
        if (mag < cfg.beta) st.mode = TunerMode::Nominal;
    }
    return st.mode == TunerMode::Nominal ? cfg.c1 : cfg.c2;
}

/// Folds tuner_step over a whole error sequence from the Nominal mode.
inline std::vector<double> tuner_trace(std::span<const double> errors, const TunerConfig& cfg) {
    TunerState st;
    std::vector<double> out;
    out.reserve(errors.size());
    for (double e : errors) out.push_back(tuner_step(e, cfg, st));
    return out;
}

} // namespace excitasim
