#pragma once

#include <filesystem>

#include "gocollab/nn/net.hpp"

namespace gocollab::nn {

// Binary parameter file: magic "CCNN", format version u32, then one chunk per
// layer: layer index u32, tensor count u32, and per tensor rank u32,
// dims u32[], payload little-endian f64[]. Round-trips are bit-exact.
inline constexpr std::uint32_t kParamsFormatVersion = 1;

void save_params(const std::filesystem::path& path, const Parameters& params);

// Validates shapes against `net`; throws IoError on corrupt/truncated files
// and on format version mismatch. No partial state: either the returned
// Parameters is complete or an exception is thrown.
Parameters load_params(const std::filesystem::path& path, const NetworkSpec& net);

}  // namespace gocollab::nn
