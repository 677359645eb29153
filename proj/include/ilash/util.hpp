#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ilash {

// SplitMix64 step; statelessly derives well-mixed values from a counter.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent substream seed from up to three components.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Formats a double in plain decimal notation (never scientific), using the
// shortest string that parses back to the same value. Integral values print
// without a fractional part.
std::string format_number(double v);

std::vector<std::string> split(const std::string& line, char sep);

}  // namespace ilash
