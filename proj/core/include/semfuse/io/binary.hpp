#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

namespace semfuse::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// Opens `path` for binary writing, creating parent directories. Throws
/// InvalidInput when the file cannot be created.
std::ofstream open_for_write(const std::filesystem::path& path);
std::ifstream open_for_read(const std::filesystem::path& path);

/// Self-describing container used by the binary artifacts: one line of JSON
/// followed by raw little-endian payload.
void write_header(std::ostream& out, const nlohmann::json& header);
/// Reads and parses the header line; `path` only feeds error messages.
nlohmann::json read_header(std::istream& in, const std::filesystem::path& path);

/// Reads a required header field, throwing ParseError naming the file when it is
/// missing or has the wrong type.
template <typename T>
T header_field(const nlohmann::json& header, const char* key, const std::filesystem::path& path);

template <typename T>
void write_values(std::ostream& out, std::span<const T> values) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
void write_value(std::ostream& out, const T& value) {
  write_values(out, std::span<const T>(&value, 1));
}

/// Throws ParseError on a short read.
void read_bytes(std::istream& in, char* dst, std::size_t n, const std::filesystem::path& path);

template <typename T>
void read_values(std::istream& in, std::span<T> values, const std::filesystem::path& path) {
  static_assert(std::is_trivially_copyable_v<T>);
  read_bytes(in, reinterpret_cast<char*>(values.data()), values.size_bytes(), path);
}

template <typename T>
T read_value(std::istream& in, const std::filesystem::path& path) {
  T value{};
  read_values(in, std::span<T>(&value, 1), path);
  return value;
}

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace semfuse::io
