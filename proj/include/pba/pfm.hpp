#pragma once

#include <string>

#include "pba/image.hpp"

namespace pba {

// Portable Float Map I/O. "Pf" = 1 channel, "PF" = 3 channels, binary float32
// scanlines ordered bottom-to-top, negative scale marks little-endian data.
// Both throw std::runtime_error with the file name on malformed input/output.
ImageF read_pfm(const std::string& path);
void write_pfm(const std::string& path, const ImageF& img);

}  // namespace pba
