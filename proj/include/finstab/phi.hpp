// Compensation functions phi(y) used in the H2 condition and the feedback laws.

#pragma once

#include "finstab/linalg.hpp"

#include <string>

namespace finstab {

enum class PhiKind { Zero, Constant, WaveK };

/// phi: W-perp -> [0, inf).
///
/// WaveK evaluates  min(cap, max_{i<q} w_i |a_i| / max(|b_i|, floor))  where
/// a_i = y[i] and b_i = y[n_modes + i] (positions first, then velocities) and
/// w_i are per-mode weights. With unit weights this is the literal ratio
/// max |alpha_i / beta_i|; the wave front-end uses w_i = i*pi, which is the
/// value that actually dominates <Ay, By> / |By|^2 in energy coordinates.
struct PhiSpec {
    PhiKind kind = PhiKind::Zero;
    double constant = 0.0;
    double cap = 1e3;
    double floor = 1e-12;
    Eigen::Index n_modes = 0;
    Vec weights;  // size q for WaveK

    static PhiSpec zero() { return {}; }
    static PhiSpec constant_value(double k);
    static PhiSpec wave_k(Eigen::Index n_modes, Vec weights, double cap = 1e3,
                          double floor = 1e-12);

    /// True when the cap bound the value at y.
    bool capped_at(const Vec& y) const;
};

double evaluate_phi(const PhiSpec& phi, const Vec& y);

std::string to_string(PhiKind kind);
PhiKind phi_kind_from_string(const std::string& s);

}  // namespace finstab
