#include "ipu/services/storage.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <system_error>

namespace ipu::services {

namespace fs = std::filesystem;

const char* to_string(FsError e) {
    switch (e) {
        case FsError::NotFound: return "NotFound";
        case FsError::OutsideRoot: return "OutsideRoot";
        case FsError::Exists: return "Exists";
        case FsError::IoError: return "IoError";
    }
    return "?";
}

namespace {

int64_t mtime_ms_of(const fs::path& p) {
    std::error_code ec;
    auto ft = fs::last_write_time(p, ec);
    if (ec) return 0;
    // file_clock -> system_clock via the current offset between the clocks
    // (libstdc++ here lacks clock_cast); sub-second skew is irrelevant for
    // directory listings.
    const auto sys = std::chrono::system_clock::now() +
                     std::chrono::duration_cast<std::chrono::system_clock::duration>(
                         ft - fs::file_time_type::clock::now());
    return std::chrono::duration_cast<std::chrono::milliseconds>(sys.time_since_epoch()).count();
}

}  // namespace

Storage::Storage(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    root_ = fs::weakly_canonical(root_);
}

Expected<fs::path, FsError> Storage::resolve(const std::string& rel) const {
    fs::path p(rel);
    if (p.is_absolute()) return FsError::OutsideRoot;
    // Lexical confinement: collapse "." and ".." before any filesystem
    // access, then require the result to stay at or below the root.
    fs::path normal = (root_ / p).lexically_normal();
    auto [root_end, rest] =
        std::mismatch(root_.begin(), root_.end(), normal.begin(), normal.end());
    if (root_end != root_.end()) return FsError::OutsideRoot;
    return normal;
}

Expected<std::vector<FileInfo>, FsError> Storage::list(const std::string& rel_dir) const {
    auto dir = resolve(rel_dir);
    if (!dir.ok()) return dir.error();
    std::error_code ec;
    if (!fs::exists(*dir, ec)) return FsError::NotFound;
    if (!fs::is_directory(*dir, ec)) return FsError::NotFound;
    std::vector<FileInfo> out;
    for (const auto& entry : fs::directory_iterator(*dir, ec)) {
        FileInfo info;
        info.name = entry.path().lexically_relative(root_).generic_string();
        if (entry.is_regular_file(ec)) {
            info.size_bytes = entry.file_size(ec);
        }
        info.mtime_ms = mtime_ms_of(entry.path());
        out.push_back(std::move(info));
    }
    if (ec) return FsError::IoError;
    std::sort(out.begin(), out.end(),
              [](const FileInfo& a, const FileInfo& b) { return a.name < b.name; });
    return out;
}

Expected<Bytes, FsError> Storage::read(const std::string& rel) const {
    auto p = resolve(rel);
    if (!p.ok()) return p.error();
    std::error_code ec;
    if (!fs::is_regular_file(*p, ec)) return FsError::NotFound;
    std::ifstream in(*p, std::ios::binary);
    if (!in) return FsError::IoError;
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) return FsError::IoError;
    return data;
}

Expected<uint64_t, FsError> Storage::write(const std::string& rel, ByteView data) {
    auto p = resolve(rel);
    if (!p.ok()) return p.error();
    std::error_code ec;
    fs::create_directories(p->parent_path(), ec);
    std::ofstream out(*p, std::ios::binary | std::ios::trunc);
    if (!out) return FsError::IoError;
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) return FsError::IoError;
    return uint64_t{data.size()};
}

Expected<FileInfo, FsError> Storage::stat(const std::string& rel) const {
    auto p = resolve(rel);
    if (!p.ok()) return p.error();
    std::error_code ec;
    if (!fs::exists(*p, ec)) return FsError::NotFound;
    FileInfo info;
    info.name = p->lexically_relative(root_).generic_string();
    if (fs::is_regular_file(*p, ec)) info.size_bytes = fs::file_size(*p, ec);
    info.mtime_ms = mtime_ms_of(*p);
    return info;
}

Expected<void, FsError> Storage::move(const std::string& from, const std::string& to,
                                      bool overwrite) {
    auto src = resolve(from);
    if (!src.ok()) return src.error();
    auto dst = resolve(to);
    if (!dst.ok()) return dst.error();
    std::error_code ec;
    if (!fs::exists(*src, ec)) return FsError::NotFound;
    if (fs::exists(*dst, ec) && !overwrite) return FsError::Exists;
    fs::create_directories(dst->parent_path(), ec);
    fs::rename(*src, *dst, ec);
    if (ec) return FsError::IoError;
    return {};
}

Expected<void, FsError> Storage::copy(const std::string& from, const std::string& to,
                                      bool overwrite) {
    auto src = resolve(from);
    if (!src.ok()) return src.error();
    auto dst = resolve(to);
    if (!dst.ok()) return dst.error();
    std::error_code ec;
    if (!fs::exists(*src, ec)) return FsError::NotFound;
    if (fs::exists(*dst, ec) && !overwrite) return FsError::Exists;
    fs::create_directories(dst->parent_path(), ec);
    const auto opts = overwrite ? fs::copy_options::overwrite_existing : fs::copy_options::none;
    fs::copy_file(*src, *dst, opts, ec);
    if (ec) return FsError::IoError;
    return {};
}

Expected<void, FsError> Storage::remove(const std::string& rel) {
    auto p = resolve(rel);
    if (!p.ok()) return p.error();
    std::error_code ec;
    if (!fs::exists(*p, ec)) return FsError::NotFound;
    fs::remove_all(*p, ec);
    if (ec) return FsError::IoError;
    return {};
}

}  // namespace ipu::services
