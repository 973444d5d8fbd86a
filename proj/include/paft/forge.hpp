#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paft/prompt.hpp"

namespace paft {

/// Builds the instruction sent to a generator model. Few-shot requires an
/// example_format, which is embedded verbatim.
MetaPrompt compose_meta_prompt(const std::string& task_description, Strategy strategy, int n,
                               const std::optional<std::string>& example_format = std::nullopt);

/// Parses generator output into templates. Accepts "1." / "2)" enumerations
/// (continuation lines join the current item) or one template per line.
/// Duplicates are removed by normalized body; split starts unassigned.
std::vector<PromptTemplate> parse_generated(const std::string& raw, Strategy strategy,
                                            const std::string& origin);

/// Splits the non-adversarial templates into train/test by seeded shuffle.
/// Test gets floor(total * test_weight / (train_weight + test_weight)),
/// the remainder trains. Pure in (set, weights, seed).
PromptSet partition_prompts(const PromptSet& set, int train_weight, int test_weight,
                            int64_t seed);

} // namespace paft
