#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paft/prompt.hpp"

namespace paft {

struct TaskSchema {
    std::string schema_id;
    std::vector<std::string> field_names;
    std::vector<std::string> label_space;

    void validate() const;
    bool has_field(const std::string& name) const;
    /// Index of a label in label_space; throws SchemaError for unknown labels.
    size_t label_index(const std::string& label) const;
};

struct TaskInstance {
    std::map<std::string, std::string> fields;
    std::string gold;
};

/// A fully substituted model input plus its gold label.
struct RenderedExample {
    std::string text;
    std::string gold;
};

struct ValidationResult {
    bool ok = true;
    std::vector<std::string> unknown_placeholders;
};

/// ok iff every placeholder in the template body names a schema field.
ValidationResult validate_template(const PromptTemplate& t, const TaskSchema& schema);

/// Literal single-pass substitution of {name} placeholders with instance
/// fields. Values are never re-scanned, so substitution cannot recurse.
RenderedExample render(const PromptTemplate& t, const TaskInstance& x, const TaskSchema& schema);

/// Word inventories of the default synthetic family. Exposed so the offline
/// template generator can weave the same words into template prose.
struct Pattern2Words {
    std::vector<std::string> cue_first_half;  // flagged words labelled "A"
    std::vector<std::string> cue_second_half; // flagged words labelled "B"
    std::vector<std::string> fillers;
    std::vector<std::string> option_a_phrases;
    std::vector<std::string> option_b_phrases;
};

const Pattern2Words& pattern2_words();
const TaskSchema& family_schema(const std::string& family);
std::vector<std::string> registered_families();

/// Deterministic synthetic dataset. The default family is "pattern2": the
/// pattern field reads "<filler>, <filler> => <word>" and the gold label is
/// "A" when the flagged word starts with a letter in a..m, else "B".
std::vector<TaskInstance> synth_dataset(const std::string& family, size_t n, uint64_t seed);

void save_dataset(const std::vector<TaskInstance>& data, const TaskSchema& schema,
                  const std::string& path);
std::vector<TaskInstance> load_dataset(const std::string& path, const TaskSchema& schema);

} // namespace paft
