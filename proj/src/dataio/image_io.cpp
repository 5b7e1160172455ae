#include "dggan/dataio/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "dggan/core/errors.hpp"

namespace dggan::dataio {

namespace {

std::mutex g_trace_mutex;
std::vector<std::string> g_depth_reads;

void record_depth_read(const std::filesystem::path& path) {
  std::lock_guard<std::mutex> lock(g_trace_mutex);
  g_depth_reads.push_back(std::filesystem::weakly_canonical(path).string());
}

void skip_pnm_whitespace(std::istream& is) {
  for (;;) {
    int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
}

int read_pnm_int(std::istream& is) {
  skip_pnm_whitespace(is);
  int v = 0;
  is >> v;
  return v;
}

}  // namespace

void write_ppm8(const std::filesystem::path& path, const Tensor& rgb) {
  if (rgb.ndim() != 3 || rgb.dim(2) != 3) throw IoError("write_ppm8: expected [H,W,3] tensor");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path.string());
  const int h = rgb.dim(0), w = rgb.dim(1);
  os << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = rgb.at(y, x, c);
        v = std::clamp(v, 0.0, 1.0);
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

Tensor read_ppm8(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  std::string magic;
  is >> magic;
  if (magic != "P6") throw IoError("not a binary PPM: " + path.string());
  const int w = read_pnm_int(is);
  const int h = read_pnm_int(is);
  const int maxval = read_pnm_int(is);
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported PPM header: " + path.string());
  is.get();  // single whitespace after header
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 3);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (is.gcount() != static_cast<std::streamsize>(buf.size()))
    throw IoError("truncated PPM: " + path.string());
  Tensor rgb({h, w, 3});
  for (std::size_t i = 0; i < buf.size(); ++i) rgb[static_cast<std::int64_t>(i)] = buf[i] / 255.0;
  return rgb;
}

void write_pgm16(const std::filesystem::path& path, const Tensor& values, double scale) {
  if (values.ndim() != 2) throw IoError("write_pgm16: expected [h,w] tensor");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path.string());
  const int h = values.dim(0), w = values.dim(1);
  os << "P5\n" << w << " " << h << "\n65535\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = values.at(y, x) * scale;
      v = std::clamp(v, 0.0, 65535.0);
      const auto q = static_cast<std::uint16_t>(std::lround(v));
      row[static_cast<std::size_t>(x) * 2] = static_cast<unsigned char>(q >> 8);
      row[static_cast<std::size_t>(x) * 2 + 1] = static_cast<unsigned char>(q & 0xff);
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

Tensor read_pgm16(const std::filesystem::path& path, double scale) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  std::string magic;
  is >> magic;
  if (magic != "P5") throw IoError("not a binary PGM: " + path.string());
  const int w = read_pnm_int(is);
  const int h = read_pnm_int(is);
  const int maxval = read_pnm_int(is);
  if (w <= 0 || h <= 0 || maxval != 65535)
    throw IoError("unsupported PGM header: " + path.string());
  is.get();
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 2);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (is.gcount() != static_cast<std::streamsize>(buf.size()))
    throw IoError("truncated PGM: " + path.string());
  Tensor values({h, w});
  for (int i = 0; i < h * w; ++i) {
    const std::uint16_t q = static_cast<std::uint16_t>((buf[static_cast<std::size_t>(i) * 2] << 8) |
                                                       buf[static_cast<std::size_t>(i) * 2 + 1]);
    values[i] = q * scale;
  }
  record_depth_read(path);
  return values;
}

std::size_t depth_read_count() {
  std::lock_guard<std::mutex> lock(g_trace_mutex);
  return g_depth_reads.size();
}

std::vector<std::string> depth_read_paths() {
  std::lock_guard<std::mutex> lock(g_trace_mutex);
  return g_depth_reads;
}

void clear_depth_read_trace() {
  std::lock_guard<std::mutex> lock(g_trace_mutex);
  g_depth_reads.clear();
}

std::size_t depth_reads_under(const std::filesystem::path& root) {
  const std::string prefix = std::filesystem::weakly_canonical(root).string();
  std::lock_guard<std::mutex> lock(g_trace_mutex);
  std::size_t n = 0;
  for (const auto& p : g_depth_reads)
    if (p.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace dggan::dataio
