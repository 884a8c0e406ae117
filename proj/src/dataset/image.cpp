// SPDX-License-Identifier: Apache-2.0
#include "mmrl/dataset/image.hpp"

#include <png.h>

#include <cstring>

#include "mmrl/common/errors.hpp"

namespace fs = std::filesystem;

namespace mmrl::dataset {

RgbImage read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw RuntimeFailure("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = image.width;
  out.height = image.height;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw RuntimeFailure("cannot decode PNG " + path.string() + ": " + message);
  }
  return out;
}

void write_png(const fs::path& path, const RgbImage& image) {
  if (image.pixels.size() != image.width * image.height * 3) {
    throw ValidationError("write_png: pixel buffer does not match dimensions");
  }
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  png_image header;
  std::memset(&header, 0, sizeof(header));
  header.version = PNG_IMAGE_VERSION;
  header.width = static_cast<png_uint_32>(image.width);
  header.height = static_cast<png_uint_32>(image.height);
  header.format = PNG_FORMAT_RGB;
  if (png_image_write_to_file(&header, path.c_str(), 0, image.pixels.data(), 0, nullptr) == 0) {
    throw RuntimeFailure("cannot write PNG " + path.string() + ": " + header.message);
  }
}

}  // namespace mmrl::dataset
