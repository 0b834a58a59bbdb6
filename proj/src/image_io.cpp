#include "vservo/image_io.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "vservo/errors.hpp"

namespace vservo::imaging {

static_assert(sizeof(Rgb) == 3, "Rgb must be tightly packed for raster I/O");

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw IoError("truncated netpbm header");
  return tok;
}

int parse_dim(const std::string& tok) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1) throw IoError("bad netpbm dimension: " + tok);
    return v;
  } catch (const std::logic_error&) {
    throw IoError("bad netpbm dimension: " + tok);
  }
}

struct Header {
  int width;
  int height;
};

// The single whitespace after maxval has already been consumed by next_token.
Header read_header(std::istream& is, const char* magic) {
  if (next_token(is) != magic) throw IoError(std::string("expected netpbm magic ") + magic);
  Header h{};
  h.width = parse_dim(next_token(is));
  h.height = parse_dim(next_token(is));
  if (next_token(is) != "255") throw IoError("only maxval 255 is supported");
  return h;
}

void read_exact(std::istream& is, char* dst, std::size_t n) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw IoError("truncated netpbm raster");
}

}  // namespace

void write_ppm(std::ostream& os, const Frame& frame) {
  os << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  const auto px = frame.pixels();
  os.write(reinterpret_cast<const char*>(px.data()),
           static_cast<std::streamsize>(px.size() * sizeof(Rgb)));
  if (!os) throw IoError("failed to write ppm");
}

Frame read_ppm(std::istream& is) {
  const Header h = read_header(is, "P6");
  Frame frame(h.width, h.height);
  auto px = frame.pixels();
  read_exact(is, reinterpret_cast<char*>(px.data()), px.size() * sizeof(Rgb));
  return frame;
}

void write_pgm(std::ostream& os, const Mask& mask) {
  os << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(mask.width()));
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.on(x, y) ? char(255) : char(0);
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("failed to write pgm");
}

Mask read_pgm(std::istream& is) {
  const Header h = read_header(is, "P5");
  Mask mask(h.width, h.height);
  std::vector<char> row(static_cast<std::size_t>(h.width));
  for (int y = 0; y < h.height; ++y) {
    read_exact(is, row.data(), row.size());
    for (int x = 0; x < h.width; ++x) mask.set(x, y, row[x] != 0);
  }
  return mask;
}

void save_ppm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_ppm(os, frame);
}

Frame load_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_ppm(is);
}

void save_pgm(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_pgm(os, mask);
}

Mask load_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_pgm(is);
}

}  // namespace vservo::imaging
