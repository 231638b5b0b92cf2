// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

// Small text helpers shared by the CSV/JSON/LP writers and readers.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fleetdp::text {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Rounds to `digits` significant decimal digits (value survives a
/// format/parse cycle at that precision unchanged).
double round_significant(double v, int digits = 9);

/// Strict full-field parse; nullopt-like failure reported through the bool.
bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, long long& out);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

} // namespace fleetdp::text
