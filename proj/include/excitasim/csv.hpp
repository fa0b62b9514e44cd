#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "excitasim/simulation.hpp"

namespace excitasim {

/// 9-significant-digit rendering, locale independent.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Fixed column order, LF line endings; deterministic for identical input.
inline void write_csv(std::ostream& os, const TimeSeries& ts) {
    os << "t,ref,vt_dev,e,u,vf,delta,slip,te,c\n";
    for (const Sample& s : ts.samples) {
        os << format_number(s.t) << ',' << format_number(s.reference) << ','
           << format_number(s.vt_dev) << ',' << format_number(s.e) << ',' << format_number(s.u)
           << ',' << format_number(s.v_f) << ',' << format_number(s.delta) << ','
           << format_number(s.slip) << ',' << format_number(s.t_e) << ',' << format_number(s.c)
           << '\n';
    }
}

/// One row per (variant, event window).
inline void write_metrics_csv(std::ostream& os, const std::vector<WindowMetrics>& windows) {
    os << "variant,window_start,window_end,iae,ise,overshoot,settling_time,max_abs_error,settled\n";
    auto row = [&](const char* variant, const WindowMetrics& w, const Metrics& m) {
        os << variant << ',' << format_number(w.t_start) << ',' << format_number(w.t_end) << ','
           << format_number(m.iae) << ',' << format_number(m.ise) << ','
           << format_number(m.overshoot) << ',' << format_number(m.settling_time) << ','
           << format_number(m.max_abs_error) << ',' << (m.settled ? 1 : 0) << '\n';
    };
    for (const auto& w : windows) {
        row("adaptive", w, w.adaptive);
        row("fixed", w, w.fixed);
    }
}

} // namespace excitasim
