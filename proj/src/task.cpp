#include "paft/task.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/rng.hpp"

namespace paft {

void TaskSchema::validate() const {
    if (field_names.empty()) raise(ErrorCode::schema_error, "schema has no fields");
    std::set<std::string> seen(field_names.begin(), field_names.end());
    if (seen.size() != field_names.size()) {
        raise(ErrorCode::schema_error, "schema field names are not unique");
    }
    if (label_space.size() < 2) raise(ErrorCode::schema_error, "label space needs >= 2 labels");
}

bool TaskSchema::has_field(const std::string& name) const {
    return std::find(field_names.begin(), field_names.end(), name) != field_names.end();
}

size_t TaskSchema::label_index(const std::string& label) const {
    for (size_t i = 0; i < label_space.size(); ++i) {
        if (label_space[i] == label) return i;
    }
    raise(ErrorCode::schema_error, "label '" + label + "' not in label space");
}

ValidationResult validate_template(const PromptTemplate& t, const TaskSchema& schema) {
    ValidationResult r;
    std::set<std::string> reported;
    for (const auto& name : placeholders(t.body)) {
        if (!schema.has_field(name) && reported.insert(name).second) {
            r.unknown_placeholders.push_back(name);
        }
    }
    r.ok = r.unknown_placeholders.empty();
    return r;
}

namespace {

bool is_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9');
}

} // namespace

RenderedExample render(const PromptTemplate& t, const TaskInstance& x, const TaskSchema& schema) {
    std::string out;
    out.reserve(t.body.size() + 64);
    const std::string& body = t.body;
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{' && i + 1 < body.size() && is_name_start(body[i + 1])) {
            size_t k = i + 2;
            while (k < body.size() && is_name_char(body[k])) ++k;
            if (k < body.size() && body[k] == '}') {
                const std::string name = body.substr(i + 1, k - i - 1);
                auto it = x.fields.find(name);
                if (it == x.fields.end()) {
                    raise(ErrorCode::missing_field, "no field '" + name + "' for placeholder");
                }
                out += it->second;
                i = k + 1;
                continue;
            }
        }
        out.push_back(body[i]);
        ++i;
    }
    // Residual schema placeholders can only appear if a field value smuggled
    // one in; the rendered-example invariant forbids that.
    for (const auto& name : placeholders(out)) {
        if (schema.has_field(name)) {
            raise(ErrorCode::render_incomplete, "rendered text still contains {" + name + "}");
        }
    }
    return RenderedExample{std::move(out), x.gold};
}

const Pattern2Words& pattern2_words() {
    // Cue words come in suffix pairs (barn/yarn, cask/task, ...) so that the
    // shared tail n-grams carry no label signal; only the first letters do.
    static const Pattern2Words words{
        {"barn", "cask", "dune", "fable", "gust", "hint",
         "jolt", "kite", "lark", "mold", "crest", "drip"},
        {"yarn", "task", "rune", "table", "rust", "tint",
         "volt", "site", "park", "told", "wrest", "trip"},
        {"atlas", "echo", "ivory", "oasis", "umbra", "aura",
         "opal", "iris", "onyx", "ultra", "envoy", "igloo"},
        {"early half", "opening side", "a-to-m range", "initial stretch"},
        {"ending half", "outer side", "n-to-z range", "ultimate stretch"},
    };
    return words;
}

const TaskSchema& family_schema(const std::string& family) {
    static const TaskSchema pattern2{
        "pattern2", {"pattern", "option_a", "option_b"}, {"A", "B"}};
    if (family == "pattern2") return pattern2;
    raise(ErrorCode::unknown_family, "no synthetic family '" + family + "'");
}

std::vector<std::string> registered_families() {
    return {"pattern2"};
}

std::vector<TaskInstance> synth_dataset(const std::string& family, size_t n, uint64_t seed) {
    const TaskSchema& schema = family_schema(family);
    (void)schema;
    const Pattern2Words& w = pattern2_words();
    Rng rng = derive_stream(seed, "synth/" + family);

    std::vector<TaskInstance> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const bool first_half = rng.next_index(2) == 0;
        const auto& cues = first_half ? w.cue_first_half : w.cue_second_half;
        const std::string& cue = cues[rng.next_index(cues.size())];
        const std::string& filler = w.fillers[rng.next_index(w.fillers.size())];

        TaskInstance inst;
        inst.fields["pattern"] = filler + " | " + cue + " | " + cue + " | " + cue + " => " + cue;
        inst.fields["option_a"] = w.option_a_phrases[rng.next_index(w.option_a_phrases.size())];
        inst.fields["option_b"] = w.option_b_phrases[rng.next_index(w.option_b_phrases.size())];
        inst.gold = first_half ? "A" : "B";
        out.push_back(std::move(inst));
    }
    return out;
}

namespace {

void check_instance(const TaskInstance& inst, const TaskSchema& schema, size_t line_no) {
    const std::string at = line_no ? " at line " + std::to_string(line_no) : "";
    for (const auto& name : schema.field_names) {
        if (!inst.fields.count(name)) {
            raise(ErrorCode::schema_error, "missing field '" + name + "'" + at);
        }
    }
    if (inst.fields.size() != schema.field_names.size()) {
        raise(ErrorCode::schema_error, "unexpected extra fields" + at);
    }
    if (std::find(schema.label_space.begin(), schema.label_space.end(), inst.gold) ==
        schema.label_space.end()) {
        raise(ErrorCode::schema_error, "gold label '" + inst.gold + "' not in label space" + at);
    }
}

} // namespace

void save_dataset(const std::vector<TaskInstance>& data, const TaskSchema& schema,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    for (const auto& inst : data) {
        check_instance(inst, schema, 0);
        nlohmann::ordered_json j;
        for (const auto& name : schema.field_names) {
            j[name] = inst.fields.at(name);
        }
        j["gold"] = inst.gold;
        out << j.dump() << "\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

std::vector<TaskInstance> load_dataset(const std::string& path, const TaskSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    std::vector<TaskInstance> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object()) {
            raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": not an object");
        }
        TaskInstance inst;
        for (const auto& [key, value] : j.items()) {
            if (!value.is_string()) {
                raise(ErrorCode::parse_error,
                      "line " + std::to_string(line_no) + ": field '" + key + "' not a string");
            }
            if (key == "gold") {
                inst.gold = value.get<std::string>();
            } else {
                inst.fields[key] = value.get<std::string>();
            }
        }
        check_instance(inst, schema, line_no);
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace paft
