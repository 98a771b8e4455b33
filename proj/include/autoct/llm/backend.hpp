#pragma once

#include "autoct/domain/errors.hpp"
#include "autoct/llm/request.hpp"

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace autoct {

/// The model could not be reached or refused the request. Fatal to a run.
class BackendFailure : public Error {
public:
    using Error::Error;
};

/// Replay-only cache has no entry for a request.
class CacheMiss : public BackendFailure {
public:
    explicit CacheMiss(const std::string& key) : BackendFailure("no cached response for request " + key), key_(key) {}
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Chat-completion backend. Implementations must tolerate concurrent calls.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

class CallbackBackend final : public LlmBackend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const ChatRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

/// Stands in for the network in replay runs: every call is counted and fails.
class NetworkGuard final : public LlmBackend {
public:
    std::string complete(const ChatRequest& request) override;
    [[nodiscard]] std::size_t attempts() const { return attempts_.load(); }

private:
    std::atomic<std::size_t> attempts_{0};
};

enum class CacheMode {
    /// Serve hits from disk; forward misses and store their responses.
    ReadWrite,
    /// Serve hits from disk; a miss throws CacheMiss.
    ReplayOnly,
};

/// Record/replay layer storing one response per file under
/// <dir>/<first two hex digits>/<digest>.json.
class CachingBackend final : public LlmBackend {
public:
    CachingBackend(std::shared_ptr<LlmBackend> inner, std::string dir, CacheMode mode);

    std::string complete(const ChatRequest& request) override;

    [[nodiscard]] std::string entry_path(const std::string& key) const;
    [[nodiscard]] std::optional<std::string> lookup(const ChatRequest& request) const;

    [[nodiscard]] std::size_t hits() const { return hits_.load(); }
    [[nodiscard]] std::size_t misses() const { return misses_.load(); }

private:
    std::shared_ptr<LlmBackend> inner_;
    std::string dir_;
    CacheMode mode_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

struct CacheCheck {
    std::size_t entries = 0;
    std::vector<std::string> problems;
};

/// Re-hashes every cached request and reports entries whose file name does not
/// match the digest of their content, or that fail to parse.
CacheCheck verify_cache(const std::string& dir);

}  // namespace autoct
