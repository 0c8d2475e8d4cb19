#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/error.hpp"

namespace ugcqa {

/// Grayscale plane with intensities in [0,1], indexed (row, col).
/// Two-scale feature extraction needs at least 32x32 pixels.
struct ImagePlane {
    Eigen::ArrayXXd luma;  // rows = height, cols = width

    Eigen::Index height() const { return luma.rows(); }
    Eigen::Index width() const { return luma.cols(); }
};

/// Throws unless the plane is at least 32x32 with finite values in [0,1].
void validate(const ImagePlane& img);

/// Reads a PGM (P2/P5) or PPM (P3/P6) file, 8- or 16-bit. Color input is
/// reduced to luma with BT.601 weights (0.299, 0.587, 0.114) after scaling
/// to [0,1]. The toolkit is deliberately codec-free; convert other formats
/// to PGM/PPM before extraction.
ImagePlane load_image(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM (test fixtures and tooling).
void save_pgm(const ImagePlane& img, const std::filesystem::path& path);

/// 2x bilinear reduction with half-pixel alignment. At exactly half scale
/// every output pixel is the mean of one 2x2 input block; a trailing odd
/// row/column is dropped.
ImagePlane downsample2x(const ImagePlane& img);

/// Frame files (PGM/PPM) inside a directory, sorted by filename so pooling
/// order is reproducible.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

}  // namespace ugcqa
