#include "augraph/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>

#include <jpeglib.h>
#include <png.h>

#include "augraph/check.hpp"

namespace augraph {

namespace {

std::string lower_ext(const std::string& path) {
  const size_t dot = path.rfind('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

ImageU8 read_png_file(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  AUG_CHECK(png_image_begin_read_from_file(&image, path.c_str()) != 0,
            "failed to open PNG ", path, ": ", image.message);
  image.format = PNG_FORMAT_RGB;
  ImageU8 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw RuntimeFault("failed to decode PNG " + path + ": " + msg);
  }
  return out;
}

struct JpegErr {
  jpeg_error_mgr pub;
  jmp_buf env;
};

void jpeg_error_longjmp(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErr*>(cinfo->err);
  longjmp(err->env, 1);
}

ImageU8 read_jpeg_file(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  AUG_CHECK(f != nullptr, "failed to open JPEG ", path);

  jpeg_decompress_struct cinfo;
  JpegErr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_longjmp;
  if (setjmp(jerr.env)) {
    jpeg_destroy_decompress(&cinfo);
    std::fclose(f);
    throw RuntimeFault("failed to decode JPEG " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  ImageU8 out;
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.pixels.resize(static_cast<size_t>(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rowp =
        out.pixels.data() + static_cast<size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &rowp, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  std::fclose(f);
  return out;
}

}  // namespace

ImageU8 read_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return read_png_file(path);
  if (ext == "jpg" || ext == "jpeg") return read_jpeg_file(path);
  throw ConfigError("unsupported image extension ." + ext + " for " + path);
}

void write_png(const std::string& path, const ImageU8& image) {
  AUG_CHECK_ARG(image.width > 0 && image.height > 0, "empty image");
  AUG_CHECK_ARG(image.pixels.size() ==
                    static_cast<size_t>(image.width) * image.height * 3,
                "pixel buffer size mismatch");
  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(image.width);
  pi.height = static_cast<png_uint_32>(image.height);
  pi.format = PNG_FORMAT_RGB;
  AUG_CHECK(png_image_write_to_file(&pi, path.c_str(), 0, image.pixels.data(),
                                    0, nullptr) != 0,
            "failed to write PNG ", path, ": ", pi.message);
}

}  // namespace augraph
