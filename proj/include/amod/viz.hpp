#pragma once

#include "amod/flow.hpp"
#include "amod/image.hpp"

namespace amod {

// Flow color wheel: hue encodes direction, saturation encodes magnitude
// normalized by the per-image maximum (zero flow renders white).
Image<float> flow_to_color(const Image<float>& flow2);

}  // namespace amod
