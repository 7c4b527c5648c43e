#include "amod/viz.hpp"

#include <cmath>

#include "amod/common.hpp"

namespace amod {

Image<float> flow_to_color(const Image<float>& flow2) {
  if (flow2.channels() != 2) throw DataError("flow_to_color: expected 2 channels");
  const int h = flow2.height(), w = flow2.width();

  float max_mag = 0.f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      max_mag = std::max(max_mag, std::hypot(flow2(0, y, x), flow2(1, y, x)));

  Image<float> out(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float fu = flow2(0, y, x), fv = flow2(1, y, x);
      const float sat = max_mag > 0.f ? std::hypot(fu, fv) / max_mag : 0.f;
      float hue = std::atan2(-fv, -fu) / 6.2831853f + 0.5f;  // [0,1)
      hue = std::min(std::max(hue * 6.f, 0.f), 6.f);
      const int sector = std::min(static_cast<int>(hue), 5);
      const float f = hue - static_cast<float>(sector);
      // HSV -> RGB with V=1.
      const float p = 1.f - sat;
      const float q = 1.f - sat * f;
      const float t = 1.f - sat * (1.f - f);
      float r, g, b;
      switch (sector) {
        case 0: r = 1.f; g = t; b = p; break;
        case 1: r = q; g = 1.f; b = p; break;
        case 2: r = p; g = 1.f; b = t; break;
        case 3: r = p; g = q; b = 1.f; break;
        case 4: r = t; g = p; b = 1.f; break;
        default: r = 1.f; g = p; b = q; break;
      }
      out(0, y, x) = r;
      out(1, y, x) = g;
      out(2, y, x) = b;
    }
  return out;
}

}  // namespace amod
