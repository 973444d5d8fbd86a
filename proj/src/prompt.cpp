#include "paft/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/hash.hpp"

namespace paft {

const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::zero_shot: return "zero_shot";
    case Strategy::few_shot: return "few_shot";
    case Strategy::human: return "human";
    case Strategy::adversarial: return "adversarial";
    }
    return "zero_shot";
}

const char* to_string(Split s) {
    switch (s) {
    case Split::unassigned: return "unassigned";
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::adversarial: return "adversarial";
    }
    return "unassigned";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "zero_shot") return Strategy::zero_shot;
    if (s == "few_shot") return Strategy::few_shot;
    if (s == "human") return Strategy::human;
    if (s == "adversarial") return Strategy::adversarial;
    raise(ErrorCode::parse_error, "unknown strategy '" + s + "'");
}

Split split_from_string(const std::string& s) {
    if (s == "unassigned") return Split::unassigned;
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    if (s == "adversarial") return Split::adversarial;
    raise(ErrorCode::parse_error, "unknown split '" + s + "'");
}

std::string normalize_body(const std::string& body) {
    std::string out;
    out.reserve(body.size());
    bool in_space = true; // leading whitespace dropped
    for (unsigned char c : body) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

namespace {

bool is_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9');
}

} // namespace

std::vector<std::string> placeholders(const std::string& body) {
    std::vector<std::string> names;
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] != '{') {
            ++i;
            continue;
        }
        size_t j = i + 1;
        if (j < body.size() && is_name_start(body[j])) {
            size_t k = j + 1;
            while (k < body.size() && is_name_char(body[k])) ++k;
            if (k < body.size() && body[k] == '}') {
                names.push_back(body.substr(j, k - j));
                i = k + 1;
                continue;
            }
        }
        ++i;
    }
    return names;
}

std::string template_id_for(const std::string& body) {
    return "p" + hex64(fnv1a64(normalize_body(body)));
}

bool PromptSet::add(PromptTemplate t) {
    const std::string norm = normalize_body(t.body);
    for (const auto& existing : templates) {
        if (existing.id == t.id || normalize_body(existing.body) == norm) return false;
    }
    templates.push_back(std::move(t));
    return true;
}

std::vector<const PromptTemplate*> PromptSet::with_split(Split s) const {
    std::vector<const PromptTemplate*> out;
    for (const auto& t : templates) {
        if (t.split == s) out.push_back(&t);
    }
    return out;
}

const PromptTemplate* PromptSet::find(const std::string& id) const {
    for (const auto& t : templates) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

void PromptSet::validate() const {
    std::unordered_set<std::string> ids;
    std::unordered_set<std::string> norms;
    for (const auto& t : templates) {
        if (normalize_body(t.body).empty()) {
            raise(ErrorCode::schema_error, "template '" + t.id + "' has empty body");
        }
        if (!ids.insert(t.id).second) {
            raise(ErrorCode::schema_error, "duplicate template id '" + t.id + "'");
        }
        if (!norms.insert(normalize_body(t.body)).second) {
            raise(ErrorCode::schema_error, "duplicate template body under id '" + t.id + "'");
        }
    }
    // id-level train/test disjointness follows from id uniqueness; body-level
    // disjointness from normalized-body uniqueness.
}

std::string prompt_set_to_json(const PromptSet& set) {
    nlohmann::ordered_json j;
    j["schema_id"] = set.schema_id;
    j["partition_seed"] = set.partition_seed;
    j["templates"] = nlohmann::ordered_json::array();
    for (const auto& t : set.templates) {
        nlohmann::ordered_json tj;
        tj["id"] = t.id;
        tj["body"] = t.body;
        tj["strategy"] = to_string(t.strategy);
        tj["origin"] = t.origin;
        tj["split"] = to_string(t.split);
        j["templates"].push_back(std::move(tj));
    }
    return j.dump(2) + "\n";
}

PromptSet prompt_set_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::parse_error, std::string("prompt set JSON: ") + e.what());
    }
    PromptSet set;
    try {
        set.schema_id = j.at("schema_id").get<std::string>();
        set.partition_seed = j.at("partition_seed").get<int64_t>();
        for (const auto& tj : j.at("templates")) {
            PromptTemplate t;
            t.id = tj.at("id").get<std::string>();
            t.body = tj.at("body").get<std::string>();
            t.strategy = strategy_from_string(tj.at("strategy").get<std::string>());
            t.origin = tj.at("origin").get<std::string>();
            t.split = split_from_string(tj.at("split").get<std::string>());
            set.templates.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::parse_error, std::string("prompt set JSON: ") + e.what());
    }
    set.validate();
    return set;
}

void save_prompt_set(const PromptSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << prompt_set_to_json(set);
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

PromptSet load_prompt_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return prompt_set_from_json(buf.str());
}

} // namespace paft
