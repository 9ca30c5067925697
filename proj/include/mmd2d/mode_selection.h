// mmd2d/mode_selection.h
//
// Biased D2D/cellular mode selection. A potential D2D UE picks D2D mode when
// T_d r_d^{-alpha_L,d} >= r_c^{-alpha_s,c}, where (r_c, s) is the distance and
// class of its minimum path-loss BS.
//
// P(cellular) is split by the class s of that BS:
//   term_s = E_{r_d}[ A_s Fhat_s(x_s(r_d)) ],  x_s(r) = r^{alpha_L,d/alpha_s,c} T_d^{-1/alpha_s,c}
// where A_s Fhat_s is the serving-distance mass of LinkDistanceModel, and
// P_D2D = 1 - term_L - term_N.

#ifndef MMD2D_MODE_SELECTION_H_
#define MMD2D_MODE_SELECTION_H_

#include <array>

#include "mmd2d/blockage.h"
#include "mmd2d/config.h"
#include "mmd2d/quadrature.h"

namespace mmd2d {

struct ModeSelectionResult {
  double p_d2d = 0.0;
  std::array<double, 2> per_class_terms{};  // indexed by index_of(LinkClass)
  double quadrature_error = 0.0;
};

/// Nearest class-s BS distance cdf, consistent with nearest_pdf.
double cellular_cdf(LinkClass s, double r, const LinkDistanceModel& model);

/// Cellular distance beyond which a class-s BS loses to a D2D link of length r_d.
double mode_switch_distance(LinkClass s, double r_d, const NetworkParams& params);

ModeSelectionResult p_d2d(const NetworkParams& params, double tol = kOuterTolerance);
ModeSelectionResult p_d2d(const LinkDistanceModel& model, double tol = kOuterTolerance);

}  // namespace mmd2d

#endif  // MMD2D_MODE_SELECTION_H_
