#pragma once

#include <string>
#include <string_view>

namespace comatcher {

// Lowercase hex SHA-1 digest.
std::string Sha1Hex(std::string_view bytes);

// Git's content hash: SHA-1 of "blob <size>\0" followed by the bytes.
std::string GitBlobSha1(std::string_view bytes);

// Throws Error("io-error") when the file cannot be read.
std::string ReadFileBytes(const std::string& path);

}  // namespace comatcher
