#include "autoct/pipeline/run_dir.hpp"

#include "autoct/common/text.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <filesystem>
#include <sys/file.h>
#include <unistd.h>

namespace autoct {

namespace fs = std::filesystem;
using nlohmann::json;

RunLock::RunLock(const std::string& dir) {
    const std::string path = dir + "/.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw RunLocked("cannot open " + path + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw RunLocked("run directory " + dir + " is in use by another process");
    }
}

RunLock::~RunLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

void create_run_dir(const RunPaths& paths) {
    if (fs::exists(paths.root) && !fs::is_empty(paths.root)) {
        throw CorruptRun("output directory " + paths.root + " already exists and is not empty; use --resume");
    }
    for (const char* sub : {"samples", "values", "features", "plans", "shap"}) fs::create_directories(fs::path(paths.root) / sub);
    write_file_atomic(paths.manifest(), json{{"format_version", kRunFormatVersion}}.dump(2) + "\n");
}

void check_run_dir(const RunPaths& paths) {
    if (!fs::exists(paths.manifest())) throw CorruptRun("not a run directory (no run.json): " + paths.root);
    json manifest;
    try {
        manifest = json::parse(read_file(paths.manifest()));
    } catch (const json::exception& e) {
        throw CorruptRun(std::string("run.json is not valid JSON: ") + e.what());
    }
    const int version = manifest.value("format_version", 0);
    if (version > kRunFormatVersion) {
        throw CorruptRun("run directory has format version " + std::to_string(version) + ", newer than supported version " +
                         std::to_string(kRunFormatVersion));
    }
    if (version < 1) throw CorruptRun("run.json has no valid format_version");
}

}  // namespace autoct
