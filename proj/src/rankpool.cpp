#include "amod/rankpool.hpp"

#include "amod/common.hpp"

namespace amod {

namespace {

void check_frames(const std::vector<Frame>& frames) {
  if (frames.size() < 2) throw DataError("rank pooling: need at least 2 frames");
  for (const Frame& f : frames)
    if (!f.same_shape(frames.front()))
      throw DataError("rank pooling: inconsistent frame shapes");
}

}  // namespace

FeatureSequence time_varying_mean(const std::vector<Frame>& frames) {
  check_frames(frames);
  const Eigen::Index L = static_cast<Eigen::Index>(frames.size());
  const Eigen::Index d = frames.front().size();
  FeatureSequence fs;
  fs.vectors.resize(L, d);
  fs.targets = centered_targets(L);

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (Eigen::Index t = 0; t < L; ++t) {
    acc += frames[static_cast<std::size_t>(t)].data().cast<double>().matrix();
    fs.vectors.row(t) = acc / static_cast<double>(t + 1);
  }
  return fs;
}

FeatureSequence raw_feature_sequence(const std::vector<Frame>& frames) {
  check_frames(frames);
  const Eigen::Index L = static_cast<Eigen::Index>(frames.size());
  const Eigen::Index d = frames.front().size();
  FeatureSequence fs;
  fs.vectors.resize(L, d);
  fs.targets = centered_targets(L);
  for (Eigen::Index t = 0; t < L; ++t)
    fs.vectors.row(t) =
        frames[static_cast<std::size_t>(t)].data().cast<double>().matrix();
  return fs;
}

Image<float> rank_pool_from_features(const FeatureSequence& fs, double C,
                                     int height, int width, int channels,
                                     double epsilon, const SvrOptions& svr) {
  if (fs.dim() != static_cast<Eigen::Index>(height) * width * channels)
    throw DataError("rank pooling: feature dimension does not match frame shape");
  SvrSolution sol = solve_linear_svr(fs, C, epsilon, svr);

  Image<float> out(height, width, channels);
  const Eigen::Index plane = static_cast<Eigen::Index>(height) * width;
  for (int c = 0; c < channels; ++c) {
    auto seg = sol.u.segment(c * plane, plane);
    const double mn = seg.minCoeff();
    const double mx = seg.maxCoeff();
    if (mx > mn) {
      out.data().segment(c * plane, plane) =
          ((seg.array() - mn) / (mx - mn)).cast<float>();
    } else {
      out.data().segment(c * plane, plane).setConstant(0.5f);
    }
  }
  return out;
}

Image<float> rank_pool(const Track& track16, double C,
                       const RankPoolOptions& options) {
  if (track16.length() != 16)
    throw DataError("rank pooling: expected exactly 16 frames");
  const Frame& f0 = track16.frames.front();
  if (f0.channels() != 3 || f0.height() != 112 || f0.width() != 112)
    throw DataError("rank pooling: expected 3x112x112 frames");
  FeatureSequence fs = options.use_time_varying_mean
                           ? time_varying_mean(track16.frames)
                           : raw_feature_sequence(track16.frames);
  return rank_pool_from_features(fs, C, f0.height(), f0.width(), f0.channels(),
                                 options.epsilon, options.svr);
}

}  // namespace amod
