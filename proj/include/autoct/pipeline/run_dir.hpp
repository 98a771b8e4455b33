#pragma once

#include "autoct/domain/errors.hpp"

#include <string>

namespace autoct {

/// A run directory whose artifacts are missing, inconsistent or from an
/// unsupported format version.
class CorruptRun : public Error {
public:
    using Error::Error;
};

/// Another process holds the run directory.
class RunLocked : public Error {
public:
    using Error::Error;
};

inline constexpr int kRunFormatVersion = 1;

/// File layout of a run directory.
struct RunPaths {
    std::string root;

    [[nodiscard]] std::string manifest() const { return root + "/run.json"; }
    [[nodiscard]] std::string config() const { return root + "/config.ini"; }
    [[nodiscard]] std::string lock() const { return root + "/.lock"; }
    [[nodiscard]] std::string tree() const { return root + "/tree.json"; }
    [[nodiscard]] std::string samples(const std::string& split) const { return root + "/samples/" + split + ".csv"; }
    [[nodiscard]] std::string values_dir() const { return root + "/values"; }
    [[nodiscard]] std::string features(const std::string& plan_set_hash) const {
        return root + "/features/" + plan_set_hash + ".csv";
    }
    [[nodiscard]] std::string test_features(const std::string& plan_set_hash) const {
        return root + "/features/" + plan_set_hash + ".test.csv";
    }
    [[nodiscard]] std::string report_json() const { return root + "/report.json"; }
    [[nodiscard]] std::string report_text() const { return root + "/report.md"; }
    [[nodiscard]] std::string shap_svg(const std::string& nct_id) const { return root + "/shap/" + nct_id + ".svg"; }
    [[nodiscard]] std::string stats() const { return root + "/run_stats.json"; }
};

/// Exclusive advisory lock on <dir>/.lock, released on destruction or
/// process exit.
class RunLock {
public:
    explicit RunLock(const std::string& dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    int fd_ = -1;
};

/// Creates the directory tree and run.json. Fails if the directory exists
/// and is not empty.
void create_run_dir(const RunPaths& paths);

/// Throws CorruptRun unless run.json exists with a supported version.
void check_run_dir(const RunPaths& paths);

}  // namespace autoct
