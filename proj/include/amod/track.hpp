#pragma once

#include <string>
#include <vector>

#include "amod/image.hpp"

namespace amod {

// Ordered frame sequence with a binary label; the unit sample.
// label: 0 = fake, 1 = real.
struct Track {
  std::vector<Frame> frames;
  int label = 0;
  std::string id;

  int length() const { return static_cast<int>(frames.size()); }
};

void validate_track(const Track& track);

// Picks frames at idx_j = floor(j*T/L), j = 0..L-1. Indices are clamped to
// T-1, so tracks shorter than L repeat their last frame. Label and id are
// preserved.
Track select_uniform(const Track& track, int L);
std::vector<int> uniform_indices(int T, int L);

}  // namespace amod
