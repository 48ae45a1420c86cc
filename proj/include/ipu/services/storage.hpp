#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ipu/common/bytes.hpp"
#include "ipu/common/expected.hpp"

namespace ipu::services {

enum class FsError : uint8_t {
    NotFound,
    OutsideRoot,
    Exists,
    IoError,
};

const char* to_string(FsError e);

struct FileInfo {
    std::string name;  // path relative to the storage root, '/'-separated
    uint64_t size_bytes = 0;
    int64_t mtime_ms = 0;
};

// Payload mass storage confined to one root directory. Every path argument is
// interpreted relative to the root and lexically normalized first; anything
// that would resolve above the root (absolute paths, ".." escapes) is
// rejected before touching the filesystem.
class Storage {
public:
    explicit Storage(std::filesystem::path root);  // creates the root if absent

    const std::filesystem::path& root_dir() const { return root_; }

    // Normalized absolute path for a confined relative path.
    Expected<std::filesystem::path, FsError> resolve(const std::string& rel) const;

    Expected<std::vector<FileInfo>, FsError> list(const std::string& rel_dir) const;
    Expected<Bytes, FsError> read(const std::string& rel) const;
    Expected<uint64_t, FsError> write(const std::string& rel, ByteView data);  // returns bytes
    Expected<FileInfo, FsError> stat(const std::string& rel) const;
    Expected<void, FsError> move(const std::string& from, const std::string& to, bool overwrite);
    Expected<void, FsError> copy(const std::string& from, const std::string& to, bool overwrite);
    Expected<void, FsError> remove(const std::string& rel);

private:
    std::filesystem::path root_;
};

}  // namespace ipu::services
