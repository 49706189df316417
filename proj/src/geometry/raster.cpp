#include "rca/geometry/raster.hpp"

#include <cctype>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::geometry {

Image::Image(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
  if (w < 0 || h < 0 || (c != 1 && c != 3)) throw ValidationError("invalid image shape");
  data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw ValidationError("pnm: malformed header");
    return std::stol(bytes_.substr(start, pos_ - start));
  }

  std::string magic() {
    if (bytes_.size() < 2) throw ValidationError("pnm: truncated header");
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ValidationError("pnm: missing separator before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_pnm(const std::string& bytes) {
  HeaderReader reader(bytes);
  const std::string magic = reader.magic();
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw ValidationError("pnm: unsupported magic '" + magic + "'");
  }
  const long w = reader.next_int();
  const long h = reader.next_int();
  const long maxval = reader.next_int();
  if (maxval != 255) throw ValidationError("pnm: only maxval 255 is supported");
  if (w <= 0 || h <= 0) throw ValidationError("pnm: invalid dimensions");
  const std::size_t offset = reader.raster_offset();
  const std::size_t expected = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - offset < expected) throw ValidationError("pnm: truncated raster");
  Image img(static_cast<int>(w), static_cast<int>(h), channels);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset), expected, img.data.begin());
  return img;
}

Image read_pnm(const std::filesystem::path& path) { return decode_pnm(read_text_file(path)); }

std::string encode_pnm(const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw ValidationError("pnm: 1 or 3 channels");
  std::string out = image.channels == 1 ? "P5\n" : "P6\n";
  out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data.data()), image.data.size());
  return out;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  write_text_file(path, encode_pnm(image));
}

}  // namespace rca::geometry
