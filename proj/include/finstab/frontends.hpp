// Modal truncations of the heat, wave and beam examples, with their exact
// unobservable subspaces, compensation functions and preset controllers.
//
// Coordinates:
//   heat  y_j, j = 1..n, coefficients of sqrt(2) sin(j pi x); identity metric.
//   wave  (a_1..a_n, b_1..b_n), energy coordinates a_j = j pi alpha_j,
//         b_j = beta_j; identity metric.
//   beam  (alpha_1..alpha_n, beta_1..beta_n), raw position / velocity
//         coefficients; metric diag((j pi)^4, 1).

#pragma once

#include "finstab/controllers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace finstab {

enum class FrontendKind { Heat1D, TransportHeat2D, Wave1D, Beam1D };

std::string to_string(FrontendKind k);
FrontendKind frontend_kind_from_string(const std::string& s);

struct FrontendSpec {
    FrontendKind kind = FrontendKind::Heat1D;
    int n_modes = 16;
    int q = 1;             // wave: number of controlled modes
    int grid_n = 64;       // transport: cells per axis
    double omega_h = 0.25; // transport: side of the control patch (0, h)^2
    Vec h_coeffs;          // beam: modal coefficients of the actuator profile (default mode 1)
};

struct Frontend {
    FrontendSpec spec;
    ModalModel model;
    std::vector<bool> wperp_mask;  // coordinates spanning W-perp
    PhiSpec phi;
    std::optional<double> analytic_delta;
    ControllerSpec preset;

    /// Spanning set of the analytic W (coordinate axes).
    Mat exact_w() const;
    /// Exact decomposition (P with 0/1 entries), certified.
    DecompositionResult decomposition() const;
};

Frontend heat_model(const FrontendSpec& spec);
Frontend wave_model(const FrontendSpec& spec);
Frontend beam_model(const FrontendSpec& spec);
/// Dispatches on spec.kind; TransportHeat2D is rejected (see transport_heat.hpp).
Frontend build_frontend(const FrontendSpec& spec);

/// Per-mode frequencies j*pi, j = 1..count.
Vec mode_frequencies(int count);

/// Initial-state presets:
///   "mode2+0.5*mode3"  sum of scaled unit coordinate vectors; modeK is the
///                      K-th coordinate (heat) or the K-th position (wave, beam),
///                      posK / velK select the position / velocity of mode K;
///   "wperp-random(s)"  metric-unit random vector in W-perp from seed s
///                      (without "(s)" the default seed is used);
///   "w-random(s)"      the same in W.
/// `paired` selects the (position, velocity) layout of second-order models.
StateVec state_preset(const ModalModel& model, const DecompositionResult& dec, bool paired,
                      const std::string& preset, std::uint64_t default_seed = 0);
StateVec initial_state_preset(const Frontend& fe, const DecompositionResult& dec,
                              const std::string& preset, std::uint64_t default_seed = 0);

}  // namespace finstab
