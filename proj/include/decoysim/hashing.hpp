#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace decoysim {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

// Whole-file helpers; throw Error{kIo}.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace decoysim
