#include "amod/augment.hpp"

#include <algorithm>
#include <cmath>

#include "amod/common.hpp"

namespace amod {

void validate_augment_config(const AugmentConfig& cfg) {
  if (cfg.sa_probability < 0.0 || cfg.sa_probability > 1.0)
    throw ConfigError("augment: sa_probability must be in [0,1]");
  if (cfg.equal_jitter_gain < 0.0 || cfg.equal_jitter_bias < 0.0 ||
      cfg.per_frame_rotation_deg < 0.0 || cfg.per_frame_shift_px < 0 ||
      cfg.per_frame_jitter_gain < 0.0 || cfg.per_frame_jitter_bias < 0.0)
    throw ConfigError("augment: ranges must be nonnegative");
  if (cfg.target_size <= 0) throw ConfigError("augment: target_size must be positive");
}

Track sequence_augment(const Track& track, Pcg32& rng) {
  if (track.frames.empty()) throw DataError("sequence_augment: empty track");
  const std::size_t idx = rng.below(static_cast<std::uint32_t>(track.frames.size()));
  Track out;
  out.id = track.id;
  out.label = 0;
  out.frames.assign(track.frames.size(), track.frames[idx]);
  return out;
}

Frame remove_black_borders(const Frame& frame) {
  if (frame.empty()) throw DataError("remove_black_borders: empty frame");
  constexpr float kTau = 2.0f / 255.0f;
  const int h = frame.height(), w = frame.width();

  int top = h, bottom = -1, left = w, right = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float m = 0.0f;
      for (int c = 0; c < frame.channels(); ++c)
        m = std::max(m, frame(c, y, x));
      if (m > kTau) {
        top = std::min(top, y);
        bottom = std::max(bottom, y);
        left = std::min(left, x);
        right = std::max(right, x);
      }
    }
  if (bottom < 0) return frame;  // all dark
  if (top == 0 && left == 0 && bottom == h - 1 && right == w - 1) return frame;

  Frame out(bottom - top + 1, right - left + 1, frame.channels());
  for (int c = 0; c < frame.channels(); ++c)
    out.plane(c) = frame.plane(c).block(top, left, out.height(), out.width());
  return out;
}

Frame pad_square(const Frame& frame, int size) {
  if (frame.height() > 512 || frame.width() > 512)
    throw DataError("pad_square: input larger than 512 px");
  if (frame.height() == size && frame.width() == size) return frame;

  int new_h, new_w;
  if (frame.height() >= frame.width()) {
    new_h = size;
    new_w = std::max(
        1, static_cast<int>(std::lround(static_cast<double>(frame.width()) * size /
                                        frame.height())));
  } else {
    new_w = size;
    new_h = std::max(
        1, static_cast<int>(std::lround(static_cast<double>(frame.height()) * size /
                                        frame.width())));
  }
  Frame scaled = resize_bilinear(frame, new_h, new_w);
  if (new_h == size && new_w == size) return scaled;

  Frame out(size, size, frame.channels());
  const int pad_top = (size - new_h) / 2;
  const int pad_left = (size - new_w) / 2;
  for (int c = 0; c < frame.channels(); ++c)
    out.plane(c).block(pad_top, pad_left, new_h, new_w) = scaled.plane(c);
  return out;
}

namespace {

struct ChannelJitter {
  float gain[3];
  float bias[3];
};

ChannelJitter draw_jitter(double gain_range, double bias_range, Pcg32& rng) {
  ChannelJitter j{};
  for (int c = 0; c < 3; ++c)
    j.gain[c] = static_cast<float>(rng.uniform(1.0 - gain_range, 1.0 + gain_range));
  for (int c = 0; c < 3; ++c)
    j.bias[c] = static_cast<float>(rng.uniform(-bias_range, bias_range));
  return j;
}

void apply_jitter(Frame& f, const ChannelJitter& j) {
  for (int c = 0; c < 3; ++c)
    f.plane(c) = (j.gain[c] * f.plane(c) + j.bias[c]).cwiseMax(0.0f).cwiseMin(1.0f);
}

}  // namespace

Track equal_color_jitter(const Track& track, const AugmentConfig& cfg, Pcg32& rng) {
  for (const Frame& f : track.frames)
    if (f.channels() != 3)
      throw DataError("equal_color_jitter: 3-channel frames required");
  ChannelJitter j = draw_jitter(cfg.equal_jitter_gain, cfg.equal_jitter_bias, rng);
  Track out = track;
  for (Frame& f : out.frames) apply_jitter(f, j);
  return out;
}

Frame per_frame_perturb(const Frame& frame, const AugmentConfig& cfg, Pcg32& rng) {
  if (frame.height() != frame.width())
    throw DataError("per_frame_perturb: square frame required");
  Frame out = frame;
  if (cfg.per_frame_rotation_deg > 0.0) {
    double angle = rng.uniform(-cfg.per_frame_rotation_deg, cfg.per_frame_rotation_deg);
    out = rotate_bilinear(out, angle);
  }
  if (frame.channels() == 3 &&
      (cfg.per_frame_jitter_gain > 0.0 || cfg.per_frame_jitter_bias > 0.0)) {
    ChannelJitter j =
        draw_jitter(cfg.per_frame_jitter_gain, cfg.per_frame_jitter_bias, rng);
    apply_jitter(out, j);
  }
  if (cfg.per_frame_shift_px > 0) {
    const int span = 2 * cfg.per_frame_shift_px + 1;
    int dx = static_cast<int>(rng.below(static_cast<std::uint32_t>(span))) -
             cfg.per_frame_shift_px;
    int dy = static_cast<int>(rng.below(static_cast<std::uint32_t>(span))) -
             cfg.per_frame_shift_px;
    out = shift_pixels(out, dx, dy);
  }
  return out;
}

AugmentedTrack apply_train_augment(const Track& track, const AugmentConfig& cfg,
                                   Pcg32& rng) {
  validate_augment_config(cfg);
  AugmentedTrack result;
  result.sa_applied = rng.bernoulli(cfg.sa_probability);
  Track work = result.sa_applied ? sequence_augment(track, rng) : track;

  for (Frame& f : work.frames) f = pad_square(remove_black_borders(f), cfg.target_size);
  work = equal_color_jitter(work, cfg, rng);
  for (Frame& f : work.frames) f = per_frame_perturb(f, cfg, rng);

  result.track = std::move(work);
  return result;
}

Track apply_eval_preprocess(const Track& track, int target_size) {
  Track out = track;
  for (Frame& f : out.frames) f = pad_square(remove_black_borders(f), target_size);
  return out;
}

}  // namespace amod
