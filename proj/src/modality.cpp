#include "amod/modality.hpp"

#include <cstring>
#include <fstream>

#include "amod/common.hpp"

namespace amod {

namespace {

void check_track16(const Track& track) {
  if (track.length() != 16)
    throw DataError("modality: expected a 16-frame track, got " +
                    std::to_string(track.length()));
  for (const Frame& f : track.frames)
    if (f.channels() != 3 || f.height() != 112 || f.width() != 112)
      throw DataError("modality: expected 3x112x112 frames");
}

Image<float> scaled_flow(const FlowField& flow, double scale) {
  Image<float> out = flow.field;
  out.data() = (out.data() * static_cast<float>(scale)).cwiseMax(-1.f).cwiseMin(1.f);
  return out;
}

}  // namespace

ModalityBundle make_bundle(const Track& track16, const ModalityOptions& options) {
  check_track16(track16);

  FeatureSequence fs = options.use_time_varying_mean
                           ? time_varying_mean(track16.frames)
                           : raw_feature_sequence(track16.frames);

  ModalityBundle bundle;
  bundle.label = track16.label;
  bundle.id = track16.id;
  bundle.rp_c1000 =
      rank_pool_from_features(fs, options.c_high, 112, 112, 3, options.epsilon);
  bundle.rp_c1 =
      rank_pool_from_features(fs, options.c_low, 112, 112, 3, options.epsilon);

  const Frame& first = track16.frames.front();
  bundle.flow_far = scaled_flow(
      optical_flow(first, track16.frames.back(), options.flow),
      options.flow_input_scale);
  bundle.flow_near = scaled_flow(
      optical_flow(first, track16.frames[1], options.flow),
      options.flow_input_scale);
  return bundle;
}

Image<float> raw_pair_concat(const Track& track16) {
  check_track16(track16);
  const Frame& a = track16.frames.front();
  const Frame& z = track16.frames.back();
  Image<float> out(112, 112, 6);
  out.data().head(a.data().size()) = a.data();
  out.data().tail(z.data().size()) = z.data();
  return out;
}

namespace {

void put_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

std::uint16_t get_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void put_f32_block(std::ostream& out, const Image<float>& img) {
  put_u16(out, static_cast<std::uint16_t>(img.channels()));
  put_u16(out, static_cast<std::uint16_t>(img.height()));
  put_u16(out, static_cast<std::uint16_t>(img.width()));
  for (Eigen::Index i = 0; i < img.data().size(); ++i) {
    std::uint32_t bits;
    float v = img.data()[i];
    std::memcpy(&bits, &v, 4);
    unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                          static_cast<unsigned char>((bits >> 8) & 0xff),
                          static_cast<unsigned char>((bits >> 16) & 0xff),
                          static_cast<unsigned char>(bits >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
}

Image<float> get_f32_block(std::istream& in) {
  const int c = get_u16(in);
  const int h = get_u16(in);
  const int w = get_u16(in);
  if (!in || c == 0 || h == 0 || w == 0)
    throw DataError("amod: corrupt tensor header");
  Image<float> img(h, w, c);
  for (Eigen::Index i = 0; i < img.data().size(); ++i) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                         (static_cast<std::uint32_t>(b[1]) << 8) |
                         (static_cast<std::uint32_t>(b[2]) << 16) |
                         (static_cast<std::uint32_t>(b[3]) << 24);
    float v;
    std::memcpy(&v, &bits, 4);
    img.data()[i] = v;
  }
  if (!in) throw DataError("amod: truncated tensor data");
  return img;
}

constexpr std::uint16_t kAmodVersion = 1;

}  // namespace

void write_amod(const std::filesystem::path& path, const ModalityBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write bundle: " + path.string());
  out.write("AMOD", 4);
  put_u16(out, kAmodVersion);
  for (const Image<float>* img : bundle.views()) put_f32_block(out, *img);
  unsigned char label = static_cast<unsigned char>(bundle.label);
  out.write(reinterpret_cast<const char*>(&label), 1);
  put_u16(out, static_cast<std::uint16_t>(bundle.id.size()));
  out.write(bundle.id.data(), static_cast<std::streamsize>(bundle.id.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

ModalityBundle read_amod(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bundle: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AMOD", 4) != 0)
    throw DataError("not an AMOD file: " + path.string());
  if (get_u16(in) != kAmodVersion)
    throw DataError("unsupported AMOD version: " + path.string());

  ModalityBundle bundle;
  bundle.rp_c1000 = get_f32_block(in);
  bundle.rp_c1 = get_f32_block(in);
  bundle.flow_far = get_f32_block(in);
  bundle.flow_near = get_f32_block(in);
  unsigned char label = 0;
  in.read(reinterpret_cast<char*>(&label), 1);
  bundle.label = label;
  std::uint16_t id_len = get_u16(in);
  bundle.id.resize(id_len);
  in.read(bundle.id.data(), id_len);
  if (!in) throw DataError("truncated AMOD file: " + path.string());
  return bundle;
}

}  // namespace amod
