#pragma once

#include "amod/rng.hpp"
#include "amod/track.hpp"

namespace amod {

struct AugmentConfig {
  double sa_probability = 0.5;
  // One gain/bias per channel, shared by the whole track ("equal" jitter).
  double equal_jitter_gain = 0.4;   // gain in [1-g, 1+g]
  double equal_jitter_bias = 0.1;   // bias in [-b, +b]
  double per_frame_rotation_deg = 5.0;
  int per_frame_shift_px = 3;
  double per_frame_jitter_gain = 0.1;
  double per_frame_jitter_bias = 0.03;
  int target_size = 112;
};

void validate_augment_config(const AugmentConfig& cfg);

// Replaces the whole track with copies of one uniformly chosen frame and
// forces the label to fake. Donors may be real or fake.
Track sequence_augment(const Track& track, Pcg32& rng);

// Crops to the bounding box of pixels whose max-channel intensity exceeds
// 2/255; an all-dark frame is returned unchanged.
Frame remove_black_borders(const Frame& frame);

// Scales the longer side to `size` (bilinear, aspect preserved), then pads
// the short side symmetrically with zeros. Odd remainders put the extra
// row/column at the bottom/right.
Frame pad_square(const Frame& frame, int size);

Track equal_color_jitter(const Track& track, const AugmentConfig& cfg, Pcg32& rng);

Frame per_frame_perturb(const Frame& frame, const AugmentConfig& cfg, Pcg32& rng);

struct AugmentedTrack {
  Track track;
  bool sa_applied = false;
};

// Training chain: SA(p) -> border removal -> pad_square -> equal color
// jitter -> per-frame perturbations.
AugmentedTrack apply_train_augment(const Track& track, const AugmentConfig& cfg,
                                   Pcg32& rng);

// Eval chain: border removal and square padding only.
Track apply_eval_preprocess(const Track& track, int target_size);

}  // namespace amod
