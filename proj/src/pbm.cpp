#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "mcmcperf/ising.hpp"

namespace mcmcperf::ising {

namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_dim(std::istream& in, const char* what) {
  skip_space_and_comments(in);
  long long v = -1;
  if (!(in >> v) || v <= 0 || v > (1 << 20)) {
    throw InputError(std::string("pbm: invalid ") + what);
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

BinaryImage read_pbm(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '1' && magic[1] != '4')) {
    throw InputError("pbm: expected P1 or P4 header");
  }
  BinaryImage img;
  img.width = read_dim(in, "width");
  img.height = read_dim(in, "height");
  img.px.assign(img.width * img.height, 0);
  if (magic[1] == '1') {
    for (std::size_t i = 0; i < img.px.size(); ++i) {
      skip_space_and_comments(in);
      const int c = in.get();
      if (c != '0' && c != '1') {
        throw InputError("pbm: bad or missing pixel " + std::to_string(i) + " (row " +
                         std::to_string(i / img.width) + ")");
      }
      img.px[i] = static_cast<std::uint8_t>(c - '0');
    }
  } else {
    const int sep = in.get();
    if (sep == EOF) throw InputError("pbm: truncated header");
    const std::size_t row_bytes = (img.width + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (std::size_t i = 0; i < img.height; ++i) {
      if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes))) {
        throw InputError("pbm: truncated raster at row " + std::to_string(i));
      }
      for (std::size_t j = 0; j < img.width; ++j) {
        img.px[i * img.width + j] = (row[j / 8] >> (7 - j % 8)) & 1;
      }
    }
  }
  return img;
}

BinaryImage read_pbm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image '" + path + "'");
  return read_pbm(in);
}

void write_pbm(std::ostream& out, const BinaryImage& img, bool raw) {
  if (img.px.size() != img.width * img.height) throw InputError("pbm: image size mismatch");
  out << (raw ? "P4\n" : "P1\n") << img.width << ' ' << img.height << '\n';
  if (raw) {
    const std::size_t row_bytes = (img.width + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (std::size_t i = 0; i < img.height; ++i) {
      std::fill(row.begin(), row.end(), 0);
      for (std::size_t j = 0; j < img.width; ++j) {
        if (img.at(i, j)) row[j / 8] |= static_cast<unsigned char>(0x80u >> (j % 8));
      }
      out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row_bytes));
    }
  } else {
    for (std::size_t i = 0; i < img.height; ++i) {
      for (std::size_t j = 0; j < img.width; ++j) {
        out << (j ? " " : "") << static_cast<int>(img.at(i, j));
      }
      out << '\n';
    }
  }
}

void write_pbm_file(const std::string& path, const BinaryImage& img, bool raw) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write image '" + path + "'");
  write_pbm(out, img, raw);
  if (!out) throw InputError("failed writing image '" + path + "'");
}

}  // namespace mcmcperf::ising
