#pragma once

#include <filesystem>

#include "angio/image_core.hpp"

namespace angio {

/// Load an 8-bit grayscale image. PNG and binary PGM (P5) are supported;
/// color PNG inputs are reduced to gray by averaging the channels.
/// Throws std::runtime_error on unreadable or unsupported files.
GrayImage read_image(const std::filesystem::path& path);

/// Write as 8-bit grayscale, format chosen by extension (.png or .pgm).
/// Values are clamped to [0,255] and rounded at this point only.
void write_image(const std::filesystem::path& path, const GrayImage& img);

GrayImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& img);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace angio
