#include "semfuse/io/binary.hpp"

#include <string>

#include "semfuse/core/errors.hpp"

namespace semfuse::io {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

void write_header(std::ostream& out, const nlohmann::json& header) { out << header.dump() << '\n'; }

nlohmann::json read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header line");
  try {
    auto header = nlohmann::json::parse(line);
    if (!header.is_object()) throw ParseError(path.string(), 1, "header is not a JSON object");
    return header;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 1, std::string("malformed header: ") + e.what());
  }
}

template <typename T>
T header_field(const nlohmann::json& header, const char* key, const std::filesystem::path& path) {
  const auto it = header.find(key);
  if (it == header.end()) throw ParseError(path.string(), 1, std::string("header lacks '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(path.string(), 1, std::string("header field '") + key + "' has the wrong type");
  }
}

template double header_field<double>(const nlohmann::json&, const char*, const std::filesystem::path&);
template int header_field<int>(const nlohmann::json&, const char*, const std::filesystem::path&);
template std::int64_t header_field<std::int64_t>(const nlohmann::json&, const char*, const std::filesystem::path&);
template std::size_t header_field<std::size_t>(const nlohmann::json&, const char*, const std::filesystem::path&);
template bool header_field<bool>(const nlohmann::json&, const char*, const std::filesystem::path&);
template std::string header_field<std::string>(const nlohmann::json&, const char*, const std::filesystem::path&);

void read_bytes(std::istream& in, char* dst, std::size_t n, const std::filesystem::path& path) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw ParseError(path.string(), 0, "truncated payload: expected " + std::to_string(n) + " more bytes");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; recover the line for the message.
    std::ifstream again(path);
    std::size_t line = 1;
    std::size_t pos = 0;
    char c;
    while (pos < e.byte && again.get(c)) {
      if (c == '\n') ++line;
      ++pos;
    }
    throw ParseError(path.string(), line, e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
}

}  // namespace semfuse::io
