#include "provgen/core/ppm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "provgen/core/error.hpp"

namespace provgen {

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  const std::string header = "P6\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + image.samples().size());
  for (float v : image.samples()) out.push_back(quantize_sample(v));
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      fail("expected a decimal number");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail("header value out of range");
      ++pos_;
    }
    return value;
  }

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '6') fail("missing P6 magic");
    pos_ = 2;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing raster separator");
    ++pos_;
  }

  std::size_t position() const { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kMalformedImage,
                "PPM: " + what + " at byte " + std::to_string(pos_));
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  HeaderReader reader(bytes);
  reader.expect_magic();
  const long width = reader.next_number();
  const long height = reader.next_number();
  const long maxval = reader.next_number();
  if (maxval != 255) reader.fail("only maxval 255 is supported");
  reader.expect_single_space();
  if (width < Image::kMinSide || height < Image::kMinSide) reader.fail("dimensions below minimum");
  const std::size_t count = static_cast<std::size_t>(width) * height * Image::kChannels;
  if (bytes.size() - reader.position() != count) reader.fail("raster size mismatch");
  std::vector<float> samples(count);
  const std::uint8_t* raster = bytes.data() + reader.position();
  for (std::size_t i = 0; i < count; ++i) samples[i] = raster[i] / 255.0f;
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  const auto bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

Image quantize_8bit(const Image& image) {
  Image out = image;
  for (float& v : out.samples()) v = quantize_sample(v) / 255.0f;
  return out;
}

}  // namespace provgen
