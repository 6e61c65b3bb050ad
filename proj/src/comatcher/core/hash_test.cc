#include "comatcher/core/hash.h"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "comatcher/core/error.h"

namespace comatcher {
namespace {

TEST(Hash, KnownDigests) {
  EXPECT_EQ(Sha1Hex(""), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  EXPECT_EQ(Sha1Hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(GitBlobSha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(GitBlobSha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Hash, FileBytesRoundtrip) {
  const auto path =
      std::filesystem::temp_directory_path() / "comatcher_hash_test.bin";
  const std::string bytes("a\0b\xff", 4);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  EXPECT_EQ(ReadFileBytes(path.string()), bytes);
  std::filesystem::remove(path);
  EXPECT_THROW(ReadFileBytes(path.string()), Error);
}

}  // namespace
}  // namespace comatcher
