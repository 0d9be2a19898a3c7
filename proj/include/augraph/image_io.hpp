#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace augraph {

// Interleaved 8-bit RGB.
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // height * width * 3

  uint8_t at(int y, int x, int c) const {
    return pixels[static_cast<size_t>((y * width + x) * 3 + c)];
  }
};

// Dispatches on extension: .png, .jpg, .jpeg (case-insensitive).
ImageU8 read_image(const std::string& path);

void write_png(const std::string& path, const ImageU8& image);

}  // namespace augraph
