#include "waveqed/tables_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace waveqed {

namespace {

constexpr std::array<char, 8> kMagic{'W', 'A', 'V', 'E', 'Q', 'T', 'T', '\0'};

template <class T>
void put(std::ofstream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw IoError("truncated table file " + path);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void save_table(const std::string& path, const TwoTimeTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kTableFormatVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, table.nodes());
  put<double>(out, table.spacing);
  for (const cplx& v : table.values.data()) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }
  if (!out) throw IoError("write to " + path + " failed");
}

TwoTimeTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw IoError(path + " is not a two-time table file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kTableFormatVersion) {
    throw IoError(path + " has table format version " + std::to_string(version) + ", expected " +
                  std::to_string(kTableFormatVersion));
  }
  get<std::uint32_t>(in, path);
  const auto nodes = get<std::uint64_t>(in, path);
  TwoTimeTable table;
  table.spacing = get<double>(in, path);
  table.values = TriangularTable(static_cast<std::size_t>(nodes));
  for (cplx& v : table.values.data()) {
    const double re = get<double>(in, path);
    const double im = get<double>(in, path);
    v = {re, im};
  }
  return table;
}

}  // namespace waveqed
