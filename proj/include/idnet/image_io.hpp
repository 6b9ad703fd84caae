#pragma once

#include "grid.hpp"

#include <iosfwd>
#include <string>

namespace idnet {

// Portable FloatMap, grayscale ("Pf"): text header
//   Pf\n<width> <height>\n-1.0\n
// followed by width*height little-endian float32 values, rows stored
// bottom-up. Values are rounded to float32 on write.
void write_pfm(std::ostream &out, Grid const &img);
void write_pfm(std::string const &path, Grid const &img);

// Reads "Pf" (one channel) or "PF" (three channels). Honors the scale sign
// for byte order. Values are returned unnormalized.
GridStack read_pfm(std::istream &in);
GridStack read_pfm(std::string const &path);

// Netpbm P2/P3/P5/P6, normalized by maxval into [0, 1].
GridStack read_pnm(std::istream &in);
GridStack read_pnm(std::string const &path);

// PNG decoded to 8 bits per sample, normalized by 1/255. Alpha is dropped;
// palettes expand to RGB.
GridStack read_png(std::string const &path);

// 8-bit PNG of one or three channels; values are clamped to [0, 1] and
// scaled by 255 with rounding.
void write_png(std::string const &path, GridStack const &channels);

// Dispatches on the file's magic bytes.
GridStack read_image(std::string const &path);

} // namespace idnet
