#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "formcalc/form_field.hpp"

namespace formcalc {

/// Binary form-field container.
///
/// Layout (header is 32 bytes):
///   char[8]  magic "FORMFLD1"
///   int32    N
///   int32    q
///   float64  L (half-length of the box)
///   int32    n (points per axis)
///   char     multi-index order tag, 'L' = lexicographic
///   char     endianness tag, '<' little or '>' big (applies to every number)
///   char[2]  reserved, zero
/// followed by C(N,q) row-major fields of n^N complex samples (re, im as
/// float64) in lexicographic multi-index order. Boundary forms use the same
/// container with N-1 in place of N.
struct ContainerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr char kContainerMagic[8] = {'F', 'O', 'R', 'M', 'F', 'L', 'D', '1'};
inline constexpr char kLexicographicTag = 'L';

void write_form(std::ostream& out, const FormField& form);
FormField read_form(std::istream& in);

void save_form(const std::filesystem::path& path, const FormField& form);
FormField load_form(const std::filesystem::path& path);

namespace detail {
char native_endian_tag();
void write_raw(std::ostream& out, const void* data, std::size_t bytes);
void read_raw(std::istream& in, void* data, std::size_t bytes, bool swap, std::size_t word);
}  // namespace detail

}  // namespace formcalc
