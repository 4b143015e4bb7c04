// Binary cache for two-time tables.
//
// Layout (little endian): 8-byte magic "WAVEQTT\0", uint32 version, uint32
// reserved, uint64 node count, float64 spacing, then the lower triangle row
// by row as (re, im) float64 pairs.
#pragma once

#include <string>

#include "waveqed/correlators.hpp"

namespace waveqed {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr unsigned kTableFormatVersion = 1;

void save_table(const std::string& path, const TwoTimeTable& table);
TwoTimeTable load_table(const std::string& path);

}  // namespace waveqed
