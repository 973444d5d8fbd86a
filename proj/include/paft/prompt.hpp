#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace paft {

enum class Strategy { zero_shot, few_shot, human, adversarial };
enum class Split { unassigned, train, test, adversarial };

const char* to_string(Strategy s);
const char* to_string(Split s);
Strategy strategy_from_string(const std::string& s);
Split split_from_string(const std::string& s);

/// One instruction template. The body may contain placeholders of the form
/// {name}; rendering substitutes task-instance fields for them.
struct PromptTemplate {
    std::string id;
    std::string body;
    Strategy strategy = Strategy::zero_shot;
    std::string origin = "offline";
    Split split = Split::unassigned;
};

/// Lowercase, whitespace runs collapsed to one space, trimmed. Two bodies
/// with equal normal forms count as duplicates.
std::string normalize_body(const std::string& body);

/// Placeholder names in order of appearance, duplicates preserved.
/// A placeholder is {name} with name matching [A-Za-z_][A-Za-z0-9_]*.
std::vector<std::string> placeholders(const std::string& body);

/// Deterministic id for a template body: "p" + hex of the normalized-body hash.
std::string template_id_for(const std::string& body);

struct PromptSet {
    std::string schema_id;
    int64_t partition_seed = 0;
    std::vector<PromptTemplate> templates;

    /// Appends unless the id or normalized body is already present.
    /// Returns true when the template was added.
    bool add(PromptTemplate t);

    std::vector<const PromptTemplate*> with_split(Split s) const;
    const PromptTemplate* find(const std::string& id) const;

    /// Enforces the id-uniqueness, body-uniqueness, and train/test
    /// disjointness invariants; throws SchemaError on violation.
    void validate() const;
};

/// Instruction sent to a generator model asking for candidate templates.
struct MetaPrompt {
    std::string text;
    Strategy strategy = Strategy::zero_shot;
    int requested_count = 0;
};

std::string prompt_set_to_json(const PromptSet& set);
PromptSet prompt_set_from_json(const std::string& text);
void save_prompt_set(const PromptSet& set, const std::string& path);
PromptSet load_prompt_set(const std::string& path);

} // namespace paft
