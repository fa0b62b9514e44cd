#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "excitasim/errors.hpp"

namespace excitasim {

/// Five triangular sets with half overlap on [-1, 1]; the end sets are
/// shouldered (inputs are clamped to the universe first).
struct TriangularPartition {
    std::array<double, 5> peaks{-1.0, -0.5, 0.0, 0.5, 1.0};

    void validate() const {
        for (int i = 0; i < 4; ++i)
            if (!(peaks[i] < peaks[i + 1]))
                throw ValidationError("partition: peaks strictly increasing violated");
        if (peaks.front() != -1.0 || peaks.back() != 1.0)
            throw ValidationError("partition: peaks must span [-1, 1]");
    }
};

/// Membership degrees of x in each set. Degrees on a shared segment are
/// computed from the same two expressions so mirrored inputs on a
/// symmetric partition produce bit-identical mirrored degrees.
inline std::array<double, 5> fuzzify(double x, const TriangularPartition& part) {
    const auto& p = part.peaks;
    const double xc = std::clamp(x, p.front(), p.back());
    std::array<double, 5> mu{};
    for (int i = 0; i < 4; ++i) {
        if (xc <= p[i + 1]) {
            const double w = p[i + 1] - p[i];
            mu[i] = (p[i + 1] - xc) / w;
            mu[i + 1] = (xc - p[i]) / w;
            return mu;
        }
    }
    mu[4] = 1.0;
    return mu;
}

/// 5x5 rule grid; cell (i, j) indexes the base singleton fired by
/// error set i and error-difference set j.
struct RuleTable {
    std::array<std::array<int, 5>, 5> cell{};

    /// Standard anti-diagonal PI table: cell(i,j) = clamp(i+j-4, -2, 2)+2.
    static RuleTable standard_pi() {
        RuleTable t;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                t.cell[i][j] = std::clamp(i + j - 4, -2, 2) + 2;
        return t;
    }

    void validate(const std::array<double, 5>& singletons) const {
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const int k = cell[i][j];
                if (k < 0 || k > 4) throw ValidationError("rules: cell index out of range 0..4");
                if (singletons[k] != -singletons[cell[4 - i][4 - j]])
                    throw ValidationError("rules: anti-symmetry violated");
            }
    }
};

/// Max-min aggregation of the rule firings onto the five singletons.
inline std::array<double, 5> infer(const std::array<double, 5>& mu_e,
                                   const std::array<double, 5>& mu_de, const RuleTable& rules) {
    std::array<double, 5> act{};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double w = std::min(mu_e[i], mu_de[j]);
            act[rules.cell[i][j]] = std::max(act[rules.cell[i][j]], w);
        }
    return act;
}

/// Weighted average of the singletons scaled by c. Factoring c out of the
/// sum makes the result exactly homogeneous in c.
inline double defuzzify(const std::array<double, 5>& activations,
                        const std::array<double, 5>& singletons, double c) {
    // Palindromic pairing keeps the result bit-exactly odd under a
    // mirror of the activations (symmetric singleton sets).
    const auto& a = activations;
    const auto& s = singletons;
    const double num = ((a[0] * s[0] + a[4] * s[4]) + (a[1] * s[1] + a[3] * s[3])) + a[2] * s[2];
    const double den = ((a[0] + a[4]) + (a[1] + a[3])) + a[2];
    if (den == 0.0) throw ZeroActivation{};
    return c * (num / den);
}

/// Fuzzy PI configuration: scaled (e, de) inputs, singleton consequents,
/// integration on the clamped output.
struct FuzzyPIConfig {
    double k_e = 10.0;   ///< error scaling gain
    double k_de = 100.0; ///< per-sample error-difference scaling gain
    double k_u = 0.05;   ///< output increment gain
    TriangularPartition e_partition{};
    TriangularPartition de_partition{};
    RuleTable rules = RuleTable::standard_pi();
    std::array<double, 5> base_singletons{-1.0, -0.5, 0.0, 0.5, 1.0};
    double u_min = -5.0;
    double u_max = 5.0;

    void validate() const {
        if (!(k_e > 0.0)) throw ValidationError("controller: k_e > 0 violated");
        if (!(k_de > 0.0)) throw ValidationError("controller: k_de > 0 violated");
        if (!(k_u > 0.0)) throw ValidationError("controller: k_u > 0 violated");
        if (!(u_min < u_max)) throw ValidationError("controller: u_min < u_max violated");
        e_partition.validate();
        de_partition.validate();
        for (int k = 0; k < 4; ++k)
            if (!(base_singletons[k] < base_singletons[k + 1]))
                throw ValidationError("controller: base_singletons strictly increasing violated");
        for (int k = 0; k < 5; ++k)
            if (base_singletons[k] != -base_singletons[4 - k])
                throw ValidationError("controller: base_singletons odd symmetry violated");
        rules.validate(base_singletons);
    }
};

struct ControllerState {
    double e_prev = 0.0;
    double u = 0.0;
    bool initialized = false;
};

inline void reset(ControllerState& st) { st = ControllerState{}; }

/// One controller sample: increment from the fuzzy map, integrated into
/// the clamped output store (the clamp doubles as anti-windup).
inline double controller_step(double e, double c, const FuzzyPIConfig& cfg, ControllerState& st) {
    const double de = st.initialized ? e - st.e_prev : 0.0;
    const auto mu_e = fuzzify(cfg.k_e * e, cfg.e_partition);
    const auto mu_de = fuzzify(cfg.k_de * de, cfg.de_partition);
    const double du = cfg.k_u * defuzzify(infer(mu_e, mu_de, cfg.rules), cfg.base_singletons, c);
    st.u = std::clamp(st.u + du, cfg.u_min, cfg.u_max);
    st.e_prev = e;
    st.initialized = true;
    return st.u;
}

} // namespace excitasim
