#pragma once

#include "amod/image.hpp"

namespace amod {

struct FlowParams {
  double pyramid_scale = 0.5;
  int levels = 4;  // auto-capped so the coarsest level keeps min dim >= 16
  int warps_per_level = 3;
  double smoothness_alpha = 20.0;
  double charbonnier_eps = 1e-3;
  int solver_iters = 50;
  double solver_tol = 1e-4;
};

void validate_flow_params(const FlowParams& p);

// Dense displacement field: channel 0 is u_x, channel 1 is v_y, in pixels.
// Convention: I_b(x + w(x)) ~ I_a(x), so content moving right between a and
// b yields positive u_x.
struct FlowField {
  Image<float> field;  // 2 x H x W
  FlowParams params;

  Image<float>::ConstPlaneMap u() const { return field.plane(0); }
  Image<float>::ConstPlaneMap v() const { return field.plane(1); }
};

// Coarse-to-fine variational flow: Charbonnier data and smoothness terms,
// incremental warping per pyramid level, lagged-nonlinearity inner solver
// (Gauss-Seidel). Deterministic for fixed inputs.
FlowField optical_flow(const Frame& a, const Frame& b, const FlowParams& p = {});

// The solver's objective (data + smoothness) for a given flow, evaluated on
// the same preprocessed grayscale images the solver uses.
double flow_energy(const Frame& a, const Frame& b, const FlowField& flow);

// Number of pyramid levels actually used for the given image size.
int effective_levels(int height, int width, const FlowParams& p);

}  // namespace amod
