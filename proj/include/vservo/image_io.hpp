#pragma once

#include <filesystem>
#include <iosfwd>

#include "vservo/imaging.hpp"

namespace vservo::imaging {

// Binary netpbm I/O. Frames use P6 and masks use P5, both with maxval 255.
// Mask cells are written as 0 / 255 and read back as off / on (any nonzero).

void write_ppm(std::ostream& os, const Frame& frame);
Frame read_ppm(std::istream& is);

void write_pgm(std::ostream& os, const Mask& mask);
Mask read_pgm(std::istream& is);

void save_ppm(const std::filesystem::path& path, const Frame& frame);
Frame load_ppm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Mask& mask);
Mask load_pgm(const std::filesystem::path& path);

}  // namespace vservo::imaging
