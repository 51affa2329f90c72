#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "msgfn/util/errors.hpp"

namespace msgfn::io {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
inline void read_bytes(std::istream& is, void* p, std::size_t n) {
  if (!is.read(static_cast<char*>(p), static_cast<std::streamsize>(n)))
    throw FormatError("unexpected end of file");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  write_bytes(os, &v, sizeof v);
}
template <typename T>
T read_pod(std::istream& is) {
  T v;
  read_bytes(is, &v, sizeof v);
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}
inline std::string read_string(std::istream& is, std::size_t max_len = 1u << 30) {
  const auto n = read_pod<std::uint32_t>(is);
  if (n > max_len) throw FormatError("string length out of range");
  std::string s(n, '\0');
  read_bytes(is, s.data(), n);
  return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[9]) {
  char buf[8];
  read_bytes(is, buf, 8);
  if (std::memcmp(buf, magic, 8) != 0) throw FormatError(std::string("bad magic, expected ") + magic);
}

}  // namespace msgfn::io
