#include "autoct/agents/prompts.hpp"

#include "autoct/common/text.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace autoct {

PromptTemplate parse_prompt(const std::string& name, const std::string& text) {
    PromptTemplate t;
    t.name = name;
    std::string* current = nullptr;
    bool saw_system = false;
    bool saw_user = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "[system]") {
            current = &t.system;
            saw_system = true;
            continue;
        }
        if (line == "[user]") {
            current = &t.user;
            saw_user = true;
            continue;
        }
        if (current == nullptr) {
            if (trim(line).empty()) continue;
            throw PromptError("prompt " + name + ": text before the first section marker");
        }
        current->append(line).push_back('\n');
    }
    if (!saw_system || !saw_user) throw PromptError("prompt " + name + " needs [system] and [user] sections");
    t.system = trim(t.system);
    t.user = trim(t.user);
    return t;
}

namespace {

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

/// Length of the placeholder name at text[pos] ("{{" already matched), or 0.
std::size_t placeholder_at(const std::string& text, std::size_t pos) {
    std::size_t i = pos + 2;
    while (i < text.size() && is_name_char(text[i])) ++i;
    if (i == pos + 2 || i + 1 >= text.size() || text[i] != '}' || text[i + 1] != '}') return 0;
    return i - (pos + 2);
}

}  // namespace

std::vector<std::string> placeholders(const std::string& text) {
    std::vector<std::string> out;
    for (std::size_t pos = text.find("{{"); pos != std::string::npos; pos = text.find("{{", pos + 1)) {
        if (const std::size_t len = placeholder_at(text, pos)) {
            std::string name = text.substr(pos + 2, len);
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
        }
    }
    return out;
}

std::string render_text(const std::string& text, const PromptVars& vars, const std::string& template_name) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        out.append(text, pos, open - pos);
        const std::size_t len = placeholder_at(text, open);
        if (len == 0) {
            out.append("{{");
            pos = open + 2;
            continue;
        }
        const std::string name = text.substr(open + 2, len);
        auto it = vars.find(name);
        if (it == vars.end()) {
            throw PromptError("prompt " + template_name + ": placeholder {{" + name + "}} is not filled");
        }
        out.append(it->second);
        pos = open + 2 + len + 2;
    }
    return out;
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const std::string path = dir_ + "/" + name + ".txt";
    if (!std::filesystem::exists(path)) throw PromptError("missing prompt template " + path);
    return cache_.emplace(name, parse_prompt(name, read_file(path))).first->second;
}

RenderedPrompt PromptLibrary::render(const std::string& name, const PromptVars& vars) const {
    const PromptTemplate& t = get(name);
    return {render_text(t.system, vars, name), render_text(t.user, vars, name)};
}

const std::vector<std::string>& agent_prompt_names() {
    static const std::vector<std::string> names = {
        "zero_shot_proposer", "factor_proposer",   "proposal_summarizer", "iterative_proposer",
        "feature_planner",    "feature_grouper",   "feature_researcher",  "feature_builder",
        "model_evaluator",    "error_evaluator"};
    return names;
}

}  // namespace autoct
