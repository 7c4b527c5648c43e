#pragma once

#include <filesystem>

#include "amod/image.hpp"

namespace amod {

// 8-bit PNG and binary PPM (P6). Loads map sample values to [0,1] by
// division by 255; writes round-trip the inverse mapping.
Frame read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Frame& img);
void write_ppm(const std::filesystem::path& path, const Frame& img);

}  // namespace amod
