#pragma once

#include <vector>

#include "vche/control.hpp"
#include "vche/forward.hpp"

namespace vche {

/// Discrete energy balance of a state trajectory.
///
/// With E = |u|^2 + a^2 |grad u|^2 and the step midpoint u_bar, the scheme gives
///   E_{n+1} - E_n + 2 nu dt (|grad u_bar|^2 + a^2 |A u_bar|^2) = 2 dt <P h_n, u_bar> - 2 dt <G_n, u_bar>,
/// where G_n is the extrapolated convection term. The last term is the
/// Adams-Bashforth defect; it vanishes for the exact convection term.
struct EnergyLedger {
  std::vector<double> time;
  std::vector<double> energy;       // E_n
  std::vector<double> dissipation;  // nu * sum_{j<n} dt (|grad u_bar|^2 + a^2 |A u_bar|^2)
  std::vector<double> lhs;          // E_n + dissipation_n
  std::vector<double> rhs;          // E_0 + constant * sum_{j<n} dt |h_j|^2
  std::vector<double> convection_defect;  // -2 dt <G_j, u_bar_j> accumulated over j < n
  std::vector<double> identity_residual;  // residual of the balance above per node

  double constant = 0.0;  // 1 / nu
  /// Smallest C with lhs_n <= E_0 + C sum dt |h|^2 at every node; 0 when the
  /// control vanishes and the inequality holds, +inf when it fails without forcing.
  double c_min = 0.0;
  double max_violation = 0.0;       // max(lhs - rhs), <= 0 when the inequality holds
  double max_energy_increase = 0.0; // max_n (E_{n+1} - E_n)
  double max_identity_residual = 0.0;
  bool inequality_holds = true;
};

/// Builds the ledger; an inequality violation is flagged beyond
/// `tolerance * max(1, E_0)`.
EnergyLedger energy_report(const StateTrajectory& traj, const ControlField& h,
                           double tolerance = 1e-12);

}  // namespace vche
