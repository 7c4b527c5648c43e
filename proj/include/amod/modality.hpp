#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amod/flow.hpp"
#include "amod/rankpool.hpp"
#include "amod/track.hpp"

namespace amod {

// The four per-track network inputs. Rank-pool channels are in [0,1];
// flow channels are scaled by 1/8 and clamped to [-1,1].
struct ModalityBundle {
  Image<float> rp_c1000;   // 3 x 112 x 112
  Image<float> rp_c1;      // 3 x 112 x 112
  Image<float> flow_far;   // 2 x 112 x 112, frames 0 and 15
  Image<float> flow_near;  // 2 x 112 x 112, frames 0 and 1
  int label = 0;
  std::string id;

  std::vector<const Image<float>*> views() const {
    return {&rp_c1000, &rp_c1, &flow_far, &flow_near};
  }
};

struct ModalityOptions {
  double c_high = 1000.0;
  double c_low = 1.0;
  double epsilon = 0.1;
  bool use_time_varying_mean = true;
  FlowParams flow;
  double flow_input_scale = 0.125;  // maps <8 px motion into [-1,1]
};

ModalityBundle make_bundle(const Track& track16,
                           const ModalityOptions& options = {});

// Ablation baseline: channel concatenation of frames 0 and 15 (6x112x112).
Image<float> raw_pair_concat(const Track& track16);

// AMOD container: magic "AMOD", version u16, four (channels u16, height
// u16, width u16, f32 data) blocks, label u8, id u16-length-prefixed UTF-8.
// All integers and floats little-endian.
void write_amod(const std::filesystem::path& path, const ModalityBundle& bundle);
ModalityBundle read_amod(const std::filesystem::path& path);

}  // namespace amod
