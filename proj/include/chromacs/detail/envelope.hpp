#pragma once

// Shared container layout of the HSC1/PSF1/MSK1/MEA1 files:
//   "<MAGIC>\n" "<decimal header length>\n" <JSON header> <binary payload>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chromacs::detail {

/// Writes magic line, length line and the header. Returns bytes written.
std::size_t write_envelope_header(std::ostream& out, std::string_view magic,
                                  const nlohmann::json& header);

/// Reads magic and header; throws FormatError on bad magic or truncation.
nlohmann::json read_envelope_header(std::istream& in, std::string_view magic);

/// 32-bit little-endian floats.
std::size_t write_f32(std::ostream& out, std::span<const double> values);
std::vector<double> read_f32(std::istream& in, std::size_t count);

std::size_t write_u8(std::ostream& out, std::span<const std::uint8_t> values);
std::vector<std::uint8_t> read_u8(std::istream& in, std::size_t count);

/// Header accessors raising HeaderError on missing or mistyped keys.
std::size_t header_size(const nlohmann::json& h, const char* key);
std::vector<double> header_reals(const nlohmann::json& h, const char* key);

} // namespace chromacs::detail
