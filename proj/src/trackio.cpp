#include "amod/trackio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "amod/common.hpp"
#include "amod/image_io.hpp"
#include "amod/rng.hpp"

namespace fs = std::filesystem;

namespace amod {

void validate_split(const ProtocolSplit& split) {
  std::set<std::string> seen;
  auto check = [&seen](const std::vector<Track>& tracks, const char* name) {
    bool labels[2] = {false, false};
    for (const Track& t : tracks) {
      if (!seen.insert(t.id).second)
        throw DataError(std::string("protocol split: duplicate track id '") +
                        t.id + "' in " + name);
      labels[t.label] = true;
    }
    return labels[0] && labels[1];
  };
  check(split.train, "train");
  if (!check(split.dev, "dev"))
    throw DataError("protocol split: dev must contain both labels");
  if (!check(split.test, "test"))
    throw DataError("protocol split: test must contain both labels");
}

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.n_real <= 0 || cfg.n_fake <= 0)
    throw ConfigError("synth: track counts must be positive");
  if (cfg.frames_per_track < 16)
    throw ConfigError("synth: frames_per_track must be >= 16");
  if (cfg.image_size < 32) throw ConfigError("synth: image_size must be >= 32");
  if (cfg.motion_amplitude <= 0.0)
    throw ConfigError("synth: motion_amplitude must be positive");
  if (cfg.noise_sigma < 0.0)
    throw ConfigError("synth: noise_sigma must be nonnegative");
}

Track load_track(const fs::path& dir_path, int label) {
  if (!fs::is_directory(dir_path))
    throw DataError("missing track directory: " + dir_path.string());

  std::vector<std::pair<long, fs::path>> numbered;
  for (const auto& entry : fs::directory_iterator(dir_path)) {
    if (!entry.is_regular_file()) continue;
    fs::path p = entry.path();
    std::string ext = p.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext != ".png" && ext != ".ppm") continue;
    std::string stem = p.stem().string();
    if (stem.empty() ||
        !std::all_of(stem.begin(), stem.end(),
                     [](unsigned char c) { return std::isdigit(c); }))
      continue;
    numbered.emplace_back(std::stol(stem), p);
  }
  std::sort(numbered.begin(), numbered.end());

  Track track;
  track.label = label;
  track.id = dir_path.filename().string();
  track.frames.reserve(numbered.size());
  for (const auto& [num, path] : numbered) track.frames.push_back(read_image(path));
  validate_track(track);
  return track;
}

std::vector<std::pair<std::string, int>> load_protocol(const fs::path& list_path) {
  std::ifstream in(list_path);
  if (!in) throw DataError("cannot open protocol list: " + list_path.string());
  std::vector<std::pair<std::string, int>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    std::size_t start = trimmed.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    trimmed = trimmed.substr(start);
    if (trimmed[0] == '#') continue;

    std::istringstream ss(trimmed);
    std::string dir, label_str, extra;
    if (!(ss >> dir >> label_str) || (ss >> extra))
      throw DataError(list_path.string() + ":" + std::to_string(line_no) +
                      ": expected '<dir> <label>'");
    if (label_str != "0" && label_str != "1")
      throw DataError(list_path.string() + ":" + std::to_string(line_no) +
                      ": label must be 0 or 1, got '" + label_str + "'");
    entries.emplace_back(dir, label_str == "1" ? 1 : 0);
  }
  return entries;
}

void write_protocol(const fs::path& list_path,
                    const std::vector<std::pair<std::string, int>>& entries) {
  std::ofstream out(list_path);
  if (!out) throw DataError("cannot write protocol list: " + list_path.string());
  for (const auto& [dir, label] : entries) out << dir << " " << label << "\n";
  if (!out) throw DataError("write failed: " + list_path.string());
}

namespace {

// Multi-octave value noise in [0,1], bilinearly upsampled random grids.
Image<float> value_noise(int size, int channels, Pcg32& rng) {
  Image<float> out(size, size, channels);
  const int grids[3] = {4, 8, 16};
  const float weights[3] = {0.55f, 0.3f, 0.15f};
  for (int c = 0; c < channels; ++c) {
    Image<float>::Plane acc = Image<float>::Plane::Zero(size, size);
    for (int o = 0; o < 3; ++o) {
      Image<float> grid(grids[o], grids[o], 1);
      for (Eigen::Index i = 0; i < grid.data().size(); ++i)
        grid.data()[i] = static_cast<float>(rng.uniform());
      Image<float> up = resize_bilinear(grid, size, size);
      acc += weights[o] * up.plane(0);
    }
    out.plane(c) = acc;
  }
  return out;
}

// Window crop with subpixel offset; source must be larger than size+|offset|.
Frame crop_window(const Frame& src, int size, double off_y, double off_x) {
  Frame out(size, size, src.channels());
  const float base_y = 0.5f * static_cast<float>(src.height() - size);
  const float base_x = 0.5f * static_cast<float>(src.width() - size);
  for (int c = 0; c < src.channels(); ++c)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        out(c, y, x) = sample_bilinear(
            src, c, base_y + static_cast<float>(y) + static_cast<float>(off_y),
            base_x + static_cast<float>(x) + static_cast<float>(off_x));
  return out;
}

void add_noise_and_clamp(Frame& f, double sigma, Pcg32& rng) {
  if (sigma > 0.0)
    for (Eigen::Index i = 0; i < f.data().size(); ++i)
      f.data()[i] += static_cast<float>(sigma * rng.normal());
  clamp01(f);
}

Frame make_texture(const SynthConfig& cfg, const SynthCondition& cond,
                   Pcg32& rng, int margin) {
  Frame tex = value_noise(cfg.image_size + 2 * margin, 3, rng);
  // Keep intensities away from 0 so border removal never crops, and leave
  // clamp headroom for jitter.
  tex.data() = 0.18f + 0.72f * tex.data();
  if (cond.gain != 1.0) tex.data() *= static_cast<float>(cond.gain);
  clamp01(tex);
  return tex;
}

}  // namespace

Track synth_real_track(const SynthConfig& cfg, const SynthCondition& cond,
                       std::uint64_t seed, const std::string& id) {
  Pcg32 rng(hash_combine(seed, hash_string(id)),
            hash_combine(cfg.texture_seed, cond.texture_salt));
  const double amp = cfg.motion_amplitude * cond.amplitude_scale;
  const int T = cfg.frames_per_track;
  const int margin =
      static_cast<int>(std::ceil(0.5 * amp * T)) + 2;  // worst-case excursion
  Frame tex = make_texture(cfg, cond, rng, margin);

  // Rigid walk of ~amp pixels per frame whose heading drifts by at most
  // pi/2 over the track, so displacement accumulates instead of cancelling.
  const double heading0 = rng.uniform(0.0, 6.283185307179586);
  const double heading_drift = rng.uniform(-1.5707963267948966, 1.5707963267948966);

  Track track;
  track.label = 1;
  track.id = id;
  track.frames.reserve(static_cast<std::size_t>(T));
  double pos_x = -0.25 * amp * T * std::cos(heading0 + 0.5 * heading_drift);
  double pos_y = -0.25 * amp * T * 0.6 * std::sin(heading0 + 0.5 * heading_drift);
  const double lim = margin - 1.0;
  for (int t = 0; t < T; ++t) {
    Frame f = crop_window(tex, cfg.image_size, std::clamp(pos_y, -lim, lim),
                          std::clamp(pos_x, -lim, lim));
    add_noise_and_clamp(f, cfg.noise_sigma, rng);
    track.frames.push_back(std::move(f));
    const double s = static_cast<double>(t) / static_cast<double>(T - 1);
    const double heading = heading0 + heading_drift * s;
    pos_x += amp * std::cos(heading);
    pos_y += amp * 0.6 * std::sin(heading);
  }
  return track;
}

Track synth_fake_track(const SynthConfig& cfg, const SynthCondition& cond,
                       std::uint64_t seed, const std::string& id, bool replay) {
  Pcg32 rng(hash_combine(seed, hash_string(id)),
            hash_combine(cfg.texture_seed, cond.texture_salt));
  const int margin = 3;
  Frame tex = make_texture(cfg, cond, rng, margin);
  Frame still = crop_window(tex, cfg.image_size, 0.0, 0.0);

  const double flicker_phase = rng.uniform(0.0, 6.283185307179586);

  Track track;
  track.label = 0;
  track.id = id;
  const int T = cfg.frames_per_track;
  track.frames.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    Frame f = still;
    if (replay) {
      // Frozen geometry, global intensity flicker.
      const double s = static_cast<double>(t) / static_cast<double>(T - 1);
      const double gain =
          1.0 + 0.12 * std::sin(12.566370614359172 * s + flicker_phase);
      f.data() *= static_cast<float>(gain);
    }
    add_noise_and_clamp(f, cfg.noise_sigma, rng);
    track.frames.push_back(std::move(f));
  }
  return track;
}

namespace {

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

struct SynthProtocol {
  SynthCondition train_cond;
  SynthCondition test_cond;
};

// The three synthetic protocols vary motion amplitude between train and
// test; protocol 3 additionally shifts global brightness, the harshest
// appearance gap for raw-pixel models.
SynthProtocol protocol_conditions(int protocol_id) {
  switch (protocol_id) {
    case 1:
      return {{1.0, 1.0, 11}, {1.0, 1.0, 12}};
    case 2:
      return {{1.25, 1.0, 21}, {2.0, 1.0, 22}};
    case 3:
    default:
      return {{1.0, 1.0, 31}, {2.0, 0.6, 32}};
  }
}

ProtocolSplit generate_protocol(const SynthConfig& cfg, std::uint64_t seed,
                                int protocol_id, const std::string& id_prefix) {
  validate_synth_config(cfg);
  SynthProtocol proto = protocol_conditions(protocol_id);

  ProtocolSplit split;
  split.protocol_id = protocol_id;
  auto split_of = [](int i, int n) {
    const int n_train = n / 2;
    const int n_dev = n / 4 > 0 ? n / 4 : (n - n_train) / 2;
    if (i < n_train) return 0;
    if (i < n_train + n_dev) return 1;
    return 2;
  };
  auto push = [&split](int which, Track&& t) {
    (which == 0 ? split.train : which == 1 ? split.dev : split.test)
        .push_back(std::move(t));
  };

  for (int i = 0; i < cfg.n_real; ++i) {
    int which = split_of(i, cfg.n_real);
    const SynthCondition& cond = which == 2 ? proto.test_cond : proto.train_cond;
    std::string id = id_prefix + "real_" + zero_pad(i, 3);
    push(which, synth_real_track(cfg, cond, seed, id));
  }
  for (int i = 0; i < cfg.n_fake; ++i) {
    int which = split_of(i, cfg.n_fake);
    const SynthCondition& cond = which == 2 ? proto.test_cond : proto.train_cond;
    std::string id = id_prefix + "fake_" + zero_pad(i, 3);
    // Alternate print-like and replay-like so every split sees both kinds.
    push(which, synth_fake_track(cfg, cond, seed, id, i % 2 == 1));
  }
  validate_split(split);
  return split;
}

}  // namespace

ProtocolSplit generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  return generate_protocol(cfg, seed, 1, "");
}

std::vector<fs::path> write_synthetic_dataset(const SynthConfig& cfg,
                                              std::uint64_t seed,
                                              const fs::path& out_dir) {
  validate_synth_config(cfg);
  std::vector<fs::path> protocol_dirs;
  for (int p = 1; p <= 3; ++p) {
    fs::path proto_dir = out_dir / ("p" + std::to_string(p));
    fs::create_directories(proto_dir);
    ProtocolSplit split =
        generate_protocol(cfg, hash_combine(seed, static_cast<std::uint64_t>(p)),
                          p, "p" + std::to_string(p) + "_");

    auto materialize = [&proto_dir](const std::vector<Track>& tracks,
                                    const char* list_name) {
      std::vector<std::pair<std::string, int>> entries;
      for (const Track& t : tracks) {
        fs::path track_dir = proto_dir / t.id;
        fs::create_directories(track_dir);
        for (int i = 0; i < t.length(); ++i)
          write_png(track_dir / (zero_pad(i + 1, 4) + ".png"),
                    t.frames[static_cast<std::size_t>(i)]);
        entries.emplace_back(t.id, t.label);
      }
      write_protocol(proto_dir / list_name, entries);
    };
    materialize(split.train, "train.txt");
    materialize(split.dev, "dev.txt");
    materialize(split.test, "test.txt");
    protocol_dirs.push_back(proto_dir);
  }
  return protocol_dirs;
}

ProtocolSplit load_protocol_split(const fs::path& protocol_dir, int protocol_id) {
  ProtocolSplit split;
  split.protocol_id = protocol_id;
  auto load_list = [&protocol_dir](const char* name, std::vector<Track>& out) {
    for (const auto& [dir, label] : load_protocol(protocol_dir / name))
      out.push_back(load_track(protocol_dir / dir, label));
  };
  load_list("train.txt", split.train);
  load_list("dev.txt", split.dev);
  load_list("test.txt", split.test);
  validate_split(split);
  return split;
}

}  // namespace amod
