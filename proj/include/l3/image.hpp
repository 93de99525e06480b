#pragma once

#include <string>

#include "l3/tensor.hpp"

namespace l3::img {

// Images are CHW tensors: [3, H, W] for colour, values in [0, 1].

// Binary PPM (P6, 8-bit).
Tensor read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Tensor& image);

// Binary PGM (P5, 8-bit) of a single [H, W] map, normalized per map to
// [0, 255]; the raw maximum is recorded in a comment line.
void write_pgm_normalized(const std::string& path, const Tensor& map);

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w);

// Uniform scale so the shortest side equals `target`; the other side rounds
// to the nearest integer.
Tensor scale_shortest_side(const Tensor& image, int target);

Tensor crop(const Tensor& image, int top, int left, int h, int w);
Tensor hflip(const Tensor& image);

}  // namespace l3::img
