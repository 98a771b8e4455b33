#include "autoct/llm/backend.hpp"

// Concrete backends without network dependencies live here.

namespace autoct {

std::string NetworkGuard::complete(const ChatRequest& request) {
    ++attempts_;
    throw BackendFailure("network access is disabled; request " + cache_key(request) + " is not cached");
}

}  // namespace autoct
