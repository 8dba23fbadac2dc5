#pragma once

// Lossless image and frame-sequence storage.
//
// Single images use binary Netpbm: PGM (P5) for grayscale at 8 or 16 bits,
// with PPM (P6) and the ASCII variants (P2, P3) accepted on input. Color
// input is converted to grayscale with the Rec. 601 luma weights
// Y = 0.299 R + 0.587 G + 0.114 B.
//
// A sequence is a directory holding frame_00000.pgm, frame_00001.pgm, ...
// and a manifest.txt of key=value lines (fps, count, bit_depth).

#include <filesystem>

#include "wavecs/imaging.hpp"

namespace wavecs {

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

Frame read_image(const std::filesystem::path& path);

/// bit_depth is 8 or 16; values are quantized as round(v * maxval).
void write_image(const Frame& frame, const std::filesystem::path& path, int bit_depth = 16);

/// Writes a binary color PPM (used by tests and the demo scenes).
void write_color_image(const Plane& r, const Plane& g, const Plane& b, const std::filesystem::path& path);

Video load_sequence(const std::filesystem::path& dir);
void save_sequence(const Video& video, const std::filesystem::path& dir, int bit_depth = 16);

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index);

}  // namespace wavecs
