#include <bit>
#include <csetjmp>
#include <cstring>
#include <string>
#include <vector>

#include <png.h>

#include "poseval/error.hpp"
#include "poseval/io.hpp"

namespace poseval {

namespace {

struct ReadState {
  std::string_view bytes;
  std::size_t pos = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<ReadState*>(png_get_io_ptr(png));
  if (state->pos + length > state->bytes.size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, state->bytes.data() + state->pos, length);
  state->pos += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void flush_callback(png_structp) {}

// libpng reports failures through longjmp; the message is stashed here.
void error_callback(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = message;
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

}  // namespace

RawDepth decode_depth_png(std::string_view bytes, const std::string& source) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    throw Error(ErrorCode::DecodeError, "not a PNG file", source);
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, error_callback, warning_callback);
  if (!png) throw Error(ErrorCode::DecodeError, "png_create_read_struct failed", source);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::DecodeError, "png_create_info_struct failed", source);
  }

  ReadState state{bytes, 0};
  RawDepth out;
  std::vector<png_bytep> rows;
  volatile bool unsupported = false;
  volatile int bit_depth = 0;
  volatile int color_type = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeError, message.empty() ? "PNG decode failed" : message, source);
  }

  png_set_read_fn(png, &state, read_callback);
  png_read_info(png, info);
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    unsupported = true;
  } else {
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.values.resize(static_cast<std::size_t>(out.width) * out.height);
    if constexpr (std::endian::native == std::endian::little) png_set_swap(png);
    png_read_update_info(png, info);
    rows.resize(out.height);
    for (int y = 0; y < out.height; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(out.values.data() + static_cast<std::size_t>(y) * out.width);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (unsupported) {
    throw Error(ErrorCode::UnsupportedBitDepth,
                "depth PNG must be 16-bit grayscale (bit depth " + std::to_string(bit_depth) + ", color type " +
                    std::to_string(color_type) + ")",
                source);
  }
  return out;
}

std::string encode_depth_png(const RawDepth& depth) {
  if (depth.width < 1 || depth.height < 1 ||
      depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw Error(ErrorCode::DimensionMismatch, "raw depth size does not match width * height");
  }

  std::string out;
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, error_callback, warning_callback);
  if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(depth.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, message.empty() ? "PNG encode failed" : message);
  }

  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(depth.width), static_cast<png_uint_32>(depth.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  if constexpr (std::endian::native == std::endian::little) png_set_swap(png);
  for (int y = 0; y < depth.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(depth.values.data()) +
                                          static_cast<std::size_t>(y) * depth.width);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

DepthMap load_depth(std::string_view png_bytes, double depth_scale, const std::string& source) {
  if (!(depth_scale > 0.0)) throw Error(ErrorCode::DecodeError, "depth_scale must be positive", source);
  const RawDepth raw = decode_depth_png(png_bytes, source);
  std::vector<double> values(raw.values.size());
  for (std::size_t i = 0; i < raw.values.size(); ++i) values[i] = raw.values[i] * depth_scale;
  return DepthMap(raw.width, raw.height, std::move(values));
}

}  // namespace poseval
