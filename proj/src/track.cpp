#include "amod/track.hpp"

#include "amod/common.hpp"

namespace amod {

void validate_track(const Track& track) {
  if (track.frames.size() < 2)
    throw DataError("track '" + track.id + "': too few frames");
  const Frame& first = track.frames.front();
  for (const Frame& f : track.frames)
    if (!f.same_shape(first))
      throw DataError("track '" + track.id + "': inconsistent dimensions");
  if (track.label != 0 && track.label != 1)
    throw DataError("track '" + track.id + "': label must be 0 or 1");
}

std::vector<int> uniform_indices(int T, int L) {
  if (L < 2) throw DataError("select_uniform: L must be >= 2");
  if (T < 1) throw DataError("select_uniform: empty track");
  std::vector<int> idx(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) {
    long long v = static_cast<long long>(j) * T / L;
    if (v > T - 1) v = T - 1;
    idx[static_cast<std::size_t>(j)] = static_cast<int>(v);
  }
  return idx;
}

Track select_uniform(const Track& track, int L) {
  std::vector<int> idx = uniform_indices(track.length(), L);
  Track out;
  out.label = track.label;
  out.id = track.id;
  out.frames.reserve(idx.size());
  for (int i : idx) out.frames.push_back(track.frames[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace amod
