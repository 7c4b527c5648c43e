#pragma once

#include "amod/svr.hpp"
#include "amod/track.hpp"

namespace amod {

// Cumulative-mean ("time varying mean") features over vectorized frames:
// v_t = (1/t) * sum_{i<=t} x_i, with centered integer targets.
FeatureSequence time_varying_mean(const std::vector<Frame>& frames);

// Raw vectorized frames as features (the TVM switch turned off).
FeatureSequence raw_feature_sequence(const std::vector<Frame>& frames);

struct RankPoolOptions {
  double epsilon = 0.1;
  bool use_time_varying_mean = true;
  SvrOptions svr;
};

// Dynamic image of an L=16 aligned 3x112x112 track: the SVR weight vector
// reshaped to the frame layout and min-max normalized per channel to [0,1].
// Channels with constant weights (in particular u = 0) map to 0.5.
Image<float> rank_pool(const Track& track16, double C,
                       const RankPoolOptions& options = {});

Image<float> rank_pool_from_features(const FeatureSequence& fs, double C,
                                     int height, int width, int channels,
                                     double epsilon = 0.1,
                                     const SvrOptions& svr = {});

}  // namespace amod
