#pragma once

#include "autoct/domain/errors.hpp"

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace autoct {

class PromptError : public Error {
public:
    using Error::Error;
};

/// Prompt text split into its [system] and [user] sections.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string user;
};

struct RenderedPrompt {
    std::string system;
    std::string user;
};

using PromptVars = std::map<std::string, std::string>;

/// Parses the "[system] ... [user] ..." file format. Section markers must
/// stand alone on a line.
PromptTemplate parse_prompt(const std::string& name, const std::string& text);

/// Replaces every {{name}} in one pass, so substituted values are never
/// rescanned. Throws PromptError naming any placeholder left unfilled.
std::string render_text(const std::string& text, const PromptVars& vars, const std::string& template_name = "");

/// Placeholder names used by a text, in order of first use.
std::vector<std::string> placeholders(const std::string& text);

/// Loads templates from <dir>/<name>.txt on first use.
class PromptLibrary {
public:
    explicit PromptLibrary(std::string dir) : dir_(std::move(dir)) {}

    const PromptTemplate& get(const std::string& name) const;
    RenderedPrompt render(const std::string& name, const PromptVars& vars) const;
    [[nodiscard]] const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    mutable std::mutex mu_;
    mutable std::map<std::string, PromptTemplate> cache_;
};

/// Names of every template the agents use.
const std::vector<std::string>& agent_prompt_names();

}  // namespace autoct
