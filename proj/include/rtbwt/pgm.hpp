#pragma once

#include <string>

#include "rtbwt/denoise.hpp"

namespace rtbwt {

// Reads a PGM image (binary P5 or ASCII P2). Pixel values are returned as
// doubles without rescaling, so an 8-bit file yields values in [0, 255].
// Header comments introduced by '#' are skipped. Throws std::runtime_error
// with a distinct message for an unsupported magic number, a malformed
// header, and truncated pixel data.
Image read_pgm(const std::string &path);

// Writes an 8-bit binary (P5) PGM. Values are rounded to nearest and clamped
// to [0, 255]. The file appears atomically: a partial write never leaves a
// usable file at the destination path.
void write_pgm(const std::string &path, const Image &img);

} // namespace rtbwt
