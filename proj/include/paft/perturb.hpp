#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paft/prompt.hpp"

namespace paft {

enum class PerturbOp { typo_swap, char_drop, punctuation_jitter, word_shuffle_window, case_flip };

const char* to_string(PerturbOp op);
PerturbOp perturb_op_from_string(const std::string& s);

struct PerturbSpec {
    std::vector<PerturbOp> ops;
    double intensity = 0.15; // per-site application rate, in (0, 1]
    uint64_t seed = 0;

    void validate() const;
};

/// Applies the listed ops to the non-placeholder spans of the template body
/// at the given rate. Placeholders survive byte-exact; the result carries
/// split=adversarial and a fresh id. Retries internally (up to 100 draws)
/// if an attempt empties the body, then throws PerturbFailed.
PromptTemplate perturb_template(const PromptTemplate& t, const PerturbSpec& spec);

} // namespace paft
