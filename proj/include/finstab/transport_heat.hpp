// Coupled heat / transport system on the unit square
//
//   dPhi/dt = Laplace(Phi) + u Phi            (Neumann boundary)
//   dPsi/dt = -dPsi/dx - dPsi/dy + u chi Psi  (zero inflow)
//
// with chi the indicator of the patch (0, h)^2. The heat part is a Neumann
// cosine modal truncation; Psi lives on the cell centres of an N x N grid and
// moves one cell diagonally per step of length 1/N, so the transport flow
// annihilates every grid function after exactly N steps.

#pragma once

#include "finstab/integrator.hpp"

#include <vector>

namespace finstab {

struct HybridState {
    Mat phi;  // n_modes x n_modes cosine coefficients, phi(j, k)
    Mat psi;  // grid_n x grid_n cell values, psi(ix, iy)
};

struct HybridRunOpts {
    double t_max = 3.0;
    double mu = 0.25;
    double dead_zone = 1e-12;
    double u_max = 1e6;
    double eps_settle = 1e-8;
    bool zero_control = false;
};

class HybridModel {
public:
    /// Throws InvalidInput unless n_modes, grid_n >= 1 and h is a multiple of
    /// 1/grid_n in (0, 1).
    HybridModel(int n_modes, int grid_n, double omega_h);

    int n_modes() const { return n_modes_; }
    int grid_n() const { return grid_n_; }
    double omega_h() const { return omega_h_; }
    int omega_cells() const { return omega_cells_; }
    double dt() const { return 1.0 / grid_n_; }
    /// The transport flow vanishes identically from this time on.
    double nilpotency_time() const { return 1.0; }
    /// B is the projector diag(I, chi): gamma = 1.
    double gamma() const { return 1.0; }

    static double heat_eigenvalue(int j, int k);
    /// Normalised Neumann cosine c_j cos(j pi x), c_0 = 1, c_j = sqrt(2).
    static double cosine_mode(int j, double x);

    HybridState zero_state() const;
    /// |Phi|^2 + |Psi|^2 (L2 norms on the unit square).
    double norm_squared(const HybridState& s) const;
    /// V = |Phi|^2 + integral over the patch of Psi^2.
    double lyapunov(const HybridState& s) const;
    /// u = -V^{-mu} outside the dead zone, clipped to -u_max.
    double control(const HybridState& s, double mu, double dead_zone, double u_max,
                   bool latched = false) const;

    /// One transport step: shift by one cell along (1, 1), cells fed from
    /// outside the square become 0, and each value is multiplied by
    /// exp(sum_k u_k chi(midpoint_k) dt / K) over K = u_sub.size() equal substeps.
    Mat transport_step(const Mat& psi, const std::vector<double>& u_sub) const;
    /// One macro step with u frozen: heat modes by exp((lambda + u) dt), then transport.
    HybridState step(const HybridState& s, double u) const;

    /// Field of the heat part at the cell centres.
    Mat reconstruct_heat(const Mat& phi) const;
    /// Midpoint-rule projection of a cell-centre field onto the cosine modes.
    Mat project_heat(const Mat& field) const;
    /// Midpoint-rule L2 norm squared of a cell-centre field.
    double grid_l2_squared(const Mat& field) const;

    /// Flattened [phi; psi] column-major vector (the trajectory state layout).
    Vec flatten(const HybridState& s) const;
    HybridState unflatten(const Vec& v) const;

    /// Zero-control check that the transport part vanishes for all steps with
    /// t >= nilpotency_time() (exactly, no tolerance) up to t_max.
    bool verify_nilpotency(const Mat& psi0, double t_max) const;

    /// Default initial state: Phi = 0.5 phi_00 + 0.3 phi_11, Psi = sin(pi x) sin(pi y).
    HybridState default_initial_state() const;

private:
    int n_modes_;
    int grid_n_;
    double omega_h_;
    int omega_cells_;
    Mat eig_;  // heat eigenvalues, (j, k)
    Mat cos_table_;  // cos_table_(j, i) = cosine_mode(j, centre_i)
};

/// Runs the hybrid closed loop on the macro grid t = k / N. The state is
/// snapped onto {V = 0} (Phi = 0, Psi = 0 on the patch) when the decay
/// envelope V^mu / (2 mu) certifies extinction within the step, as in the
/// modal integrator. Trajectory states use the flatten() layout; norms are
/// the composite L2 norm.
Trajectory simulate_hybrid(const HybridModel& model, const HybridState& s0, const HybridRunOpts& opts);

}  // namespace finstab
