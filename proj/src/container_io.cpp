#include "formcalc/container_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace formcalc {

namespace detail {

char native_endian_tag() { return std::endian::native == std::endian::little ? '<' : '>'; }

void write_raw(std::ostream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw ContainerError("container: write failed");
}

void read_raw(std::istream& in, void* data, std::size_t bytes, bool swap, std::size_t word) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (in.gcount() != static_cast<std::streamsize>(bytes)) throw ContainerError("container: truncated input");
  if (swap && word > 1) {
    auto* p = static_cast<unsigned char*>(data);
    for (std::size_t i = 0; i + word <= bytes; i += word) std::reverse(p + i, p + i + word);
  }
}

}  // namespace detail

void write_form(std::ostream& out, const FormField& form) {
  const GridSpec& g = form.grid();
  detail::write_raw(out, kContainerMagic, 8);
  const std::int32_t header_ints[2] = {g.dim, form.rank()};
  detail::write_raw(out, header_ints, sizeof(header_ints));
  detail::write_raw(out, &g.half_length, sizeof(double));
  const std::int32_t n = g.points;
  detail::write_raw(out, &n, sizeof(n));
  const char tags[4] = {kLexicographicTag, detail::native_endian_tag(), 0, 0};
  detail::write_raw(out, tags, 4);
  detail::write_raw(out, form.data().data(), form.data().size() * sizeof(Complex));
}

FormField read_form(std::istream& in) {
  char magic[8];
  detail::read_raw(in, magic, 8, false, 1);
  if (std::memcmp(magic, kContainerMagic, 8) != 0) throw ContainerError("container: bad magic");
  // the endianness tag follows the numeric header, so read it raw first
  unsigned char raw[20];
  detail::read_raw(in, raw, 20, false, 1);
  char tags[4];
  detail::read_raw(in, tags, 4, false, 1);
  if (tags[0] != kLexicographicTag) throw ContainerError("container: unsupported multi-index order tag");
  if (tags[1] != '<' && tags[1] != '>') throw ContainerError("container: bad endianness tag");
  const bool swap = tags[1] != detail::native_endian_tag();
  auto word = [&](std::size_t offset, std::size_t size, void* dst) {
    unsigned char tmp[8];
    std::memcpy(tmp, raw + offset, size);
    if (swap) std::reverse(tmp, tmp + size);
    std::memcpy(dst, tmp, size);
  };
  std::int32_t dim = 0, rank = 0, points = 0;
  double half_length = 0.0;
  word(0, 4, &dim);
  word(4, 4, &rank);
  word(8, 8, &half_length);
  word(16, 4, &points);

  GridSpec grid{dim, half_length, points, true};
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ContainerError(std::string("container: invalid header: ") + e.what());
  }
  if (rank < 0 || rank > dim) throw ContainerError("container: rank out of range");
  FormField form(grid, rank);
  detail::read_raw(in, form.data().data(), form.data().size() * sizeof(Complex), swap, sizeof(double));
  return form;
}

void save_form(const std::filesystem::path& path, const FormField& form) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContainerError("container: cannot open " + path.string());
  write_form(out, form);
}

FormField load_form(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError("container: cannot open " + path.string());
  return read_form(in);
}

}  // namespace formcalc
