#include "paft/forge.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "paft/error.hpp"
#include "paft/rng.hpp"

namespace paft {

namespace {

std::string trimmed(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

MetaPrompt compose_meta_prompt(const std::string& task_description, Strategy strategy, int n,
                               const std::optional<std::string>& example_format) {
    if (n < 1) raise(ErrorCode::invalid_argument, "requested count must be >= 1");
    if (strategy != Strategy::zero_shot && strategy != Strategy::few_shot) {
        raise(ErrorCode::invalid_argument, "meta prompts use zero_shot or few_shot");
    }

    MetaPrompt meta;
    meta.strategy = strategy;
    meta.requested_count = n;

    const std::string count = std::to_string(n);
    if (strategy == Strategy::zero_shot) {
        meta.text = "Please write " + count + " detailed English prompts for me to solve a " +
                    task_description +
                    ". You don't need to design a specific problem, just design a template, and "
                    "replace the problem description with a question. Requirements: diverse "
                    "styles, lengths, and structures. Number the prompts 1. to " + count + ".";
    } else {
        if (!example_format || trimmed(*example_format).empty()) {
            raise(ErrorCode::missing_example, "few_shot meta prompt needs an example format");
        }
        meta.text = "Please write " + count + " detailed English prompts for me to solve a " +
                    task_description +
                    ". An example: Here is the question: {question}, let's think step by step "
                    "and respond in the following format: " + *example_format +
                    " Number the prompts 1. to " + count + ".";
    }
    return meta;
}

namespace {

// Returns the payload after a leading "12." / "12)" marker, or nullopt.
std::optional<std::string> strip_enumeration(const std::string& line) {
    size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t d = i;
    while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
    if (d == i || d >= line.size()) return std::nullopt;
    if (line[d] != '.' && line[d] != ')') return std::nullopt;
    size_t p = d + 1;
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
    return line.substr(p);
}

std::vector<std::string> split_lines(const std::string& raw) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : raw) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    lines.push_back(current);
    return lines;
}

} // namespace

std::vector<PromptTemplate> parse_generated(const std::string& raw, Strategy strategy,
                                            const std::string& origin) {
    if (trimmed(raw).empty()) raise(ErrorCode::empty_generation, "generator returned no text");

    const std::vector<std::string> lines = split_lines(raw);
    const bool enumerated = std::any_of(lines.begin(), lines.end(), [](const std::string& l) {
        return strip_enumeration(l).has_value();
    });

    std::vector<std::string> items;
    if (enumerated) {
        std::string current;
        bool open = false;
        for (const auto& line : lines) {
            if (auto payload = strip_enumeration(line)) {
                if (open) items.push_back(current);
                current = *payload;
                open = true;
            } else if (open && !trimmed(line).empty()) {
                current += "\n" + line;
            }
        }
        if (open) items.push_back(current);
    } else {
        for (const auto& line : lines) {
            if (!trimmed(line).empty()) items.push_back(line);
        }
    }

    std::vector<PromptTemplate> out;
    std::set<std::string> seen;
    for (const auto& item : items) {
        const std::string body = trimmed(item);
        if (body.empty()) continue;
        if (!seen.insert(normalize_body(body)).second) continue;
        PromptTemplate t;
        t.id = template_id_for(body);
        t.body = body;
        t.strategy = strategy;
        t.origin = origin;
        t.split = Split::unassigned;
        out.push_back(std::move(t));
    }
    if (out.empty()) raise(ErrorCode::no_templates_found, "no parseable prompt items");
    return out;
}

PromptSet partition_prompts(const PromptSet& set, int train_weight, int test_weight,
                            int64_t seed) {
    if (train_weight < 1 || test_weight < 1) {
        raise(ErrorCode::invalid_argument, "partition weights must be positive");
    }

    PromptSet out = set;
    out.partition_seed = seed;

    std::vector<size_t> candidates;
    for (size_t i = 0; i < out.templates.size(); ++i) {
        if (out.templates[i].split != Split::adversarial) candidates.push_back(i);
    }

    const size_t total = candidates.size();
    const size_t n_test =
        total * static_cast<size_t>(test_weight) /
        static_cast<size_t>(train_weight + test_weight);
    const size_t n_train = total - n_test;
    if (n_test == 0 || n_train == 0) {
        raise(ErrorCode::degenerate_partition,
              "cannot split " + std::to_string(total) + " templates " +
                  std::to_string(train_weight) + ":" + std::to_string(test_weight) +
                  " into two non-empty sets");
    }

    Rng rng = derive_stream(static_cast<uint64_t>(seed), "partition");
    rng.shuffle(candidates);
    for (size_t i = 0; i < candidates.size(); ++i) {
        out.templates[candidates[i]].split = i < n_test ? Split::test : Split::train;
    }
    out.validate();
    return out;
}

} // namespace paft
