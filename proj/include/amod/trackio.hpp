#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "amod/track.hpp"

namespace amod {

struct ProtocolSplit {
  std::vector<Track> train;
  std::vector<Track> dev;
  std::vector<Track> test;
  int protocol_id = 1;
};

void validate_split(const ProtocolSplit& split);

// Synthetic dataset knobs. Real tracks are a textured pattern under smooth
// rigid motion plus Gaussian pixel noise; fake tracks are either a repeated
// still (print-like) or a still with global intensity flicker (replay-like),
// half each.
struct SynthConfig {
  int n_real = 12;
  int n_fake = 12;
  int frames_per_track = 16;
  int image_size = 112;
  double motion_amplitude = 2.5;  // pixels per track extent
  std::uint64_t texture_seed = 1234;
  double noise_sigma = 0.008;
};

void validate_synth_config(const SynthConfig& cfg);

// Loads NNNN.png / NNNN.ppm frames sorted by numeric filename order.
Track load_track(const std::filesystem::path& dir_path, int label);

// Protocol list file: one "<relative_track_dir> <label>" per non-empty line,
// '#' starts a comment. Paths resolve relative to the list file's directory.
std::vector<std::pair<std::string, int>> load_protocol(
    const std::filesystem::path& list_path);
void write_protocol(const std::filesystem::path& list_path,
                    const std::vector<std::pair<std::string, int>>& entries);

// Condition shift applied to a subset of generated tracks; the per-protocol
// train/test gap is built from these.
struct SynthCondition {
  double amplitude_scale = 1.0;
  double gain = 1.0;
  std::uint64_t texture_salt = 0;
};

Track synth_real_track(const SynthConfig& cfg, const SynthCondition& cond,
                       std::uint64_t seed, const std::string& id);
Track synth_fake_track(const SynthConfig& cfg, const SynthCondition& cond,
                       std::uint64_t seed, const std::string& id, bool replay);

// One protocol split, 50/25/25 per label, deterministic in (cfg, seed).
ProtocolSplit generate_synthetic(const SynthConfig& cfg, std::uint64_t seed);

// Materializes the three-protocol synthetic dataset (PNG frames + protocol
// lists) under out_dir; returns the protocol directories.
std::vector<std::filesystem::path> write_synthetic_dataset(
    const SynthConfig& cfg, std::uint64_t seed,
    const std::filesystem::path& out_dir);

// Reads the tracks referenced by <protocol_dir>/{train,dev,test}.txt.
ProtocolSplit load_protocol_split(const std::filesystem::path& protocol_dir,
                                  int protocol_id);

}  // namespace amod
