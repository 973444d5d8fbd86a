#include "paft/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "paft/error.hpp"
#include "paft/hash.hpp"
#include "paft/rng.hpp"

namespace paft {

const char* to_string(PerturbOp op) {
    switch (op) {
    case PerturbOp::typo_swap: return "typo_swap";
    case PerturbOp::char_drop: return "char_drop";
    case PerturbOp::punctuation_jitter: return "punctuation_jitter";
    case PerturbOp::word_shuffle_window: return "word_shuffle_window";
    case PerturbOp::case_flip: return "case_flip";
    }
    return "typo_swap";
}

PerturbOp perturb_op_from_string(const std::string& s) {
    if (s == "typo_swap") return PerturbOp::typo_swap;
    if (s == "char_drop") return PerturbOp::char_drop;
    if (s == "punctuation_jitter") return PerturbOp::punctuation_jitter;
    if (s == "word_shuffle_window") return PerturbOp::word_shuffle_window;
    if (s == "case_flip") return PerturbOp::case_flip;
    raise(ErrorCode::invalid_argument, "unknown perturbation op '" + s + "'");
}

void PerturbSpec::validate() const {
    if (ops.empty()) raise(ErrorCode::invalid_argument, "perturbation needs at least one op");
    if (!(intensity > 0.0) || intensity > 1.0) {
        raise(ErrorCode::invalid_argument, "intensity must lie in (0, 1]");
    }
}

namespace {

struct Segment {
    bool is_placeholder = false;
    std::string text;
};

bool is_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9');
}

std::vector<Segment> split_segments(const std::string& body) {
    std::vector<Segment> segments;
    std::string current;
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{' && i + 1 < body.size() && is_name_start(body[i + 1])) {
            size_t k = i + 2;
            while (k < body.size() && is_name_char(body[k])) ++k;
            if (k < body.size() && body[k] == '}') {
                if (!current.empty()) segments.push_back({false, current});
                current.clear();
                segments.push_back({true, body.substr(i, k - i + 1)});
                i = k + 1;
                continue;
            }
        }
        current.push_back(body[i]);
        ++i;
    }
    if (!current.empty()) segments.push_back({false, current});
    return segments;
}

bool is_punct(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

std::string apply_typo_swap(const std::string& s, double rate, Rng& rng) {
    std::string out = s;
    for (size_t i = 0; i + 1 < out.size(); ++i) {
        if (std::isalpha(static_cast<unsigned char>(out[i])) &&
            std::isalpha(static_cast<unsigned char>(out[i + 1])) && rng.next_double() < rate) {
            std::swap(out[i], out[i + 1]);
            ++i;
        }
    }
    return out;
}

std::string apply_char_drop(const std::string& s, double rate, Rng& rng) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c)) && rng.next_double() < rate) continue;
        out.push_back(c);
    }
    return out;
}

std::string apply_punct_jitter(const std::string& s, double rate, Rng& rng) {
    static const char punct[] = {'.', ',', ';', ':', '!', '?'};
    std::string out;
    out.reserve(s.size() + 4);
    for (char c : s) {
        if (is_punct(c) && rng.next_double() < rate) {
            if (rng.next_index(3) == 0) continue; // drop it
            out.push_back(punct[rng.next_index(6)]);
            continue;
        }
        out.push_back(c);
        if (c == ' ' && rng.next_double() < rate * 0.25) {
            out.insert(out.size() - 1, 1, punct[rng.next_index(6)]);
        }
    }
    return out;
}

std::string apply_word_shuffle(const std::string& s, double rate, Rng& rng) {
    // Words and the whitespace between them, preserved verbatim when no
    // window fires.
    std::vector<std::string> words;
    std::vector<std::string> gaps; // gaps[i] precedes words[i]
    std::string gap, word;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!word.empty()) {
                words.push_back(word);
                gaps.push_back(gap);
                word.clear();
                gap.clear();
            }
            gap.push_back(c);
        } else {
            word.push_back(c);
        }
    }
    std::string tail = gap;
    if (!word.empty()) {
        words.push_back(word);
        gaps.push_back(gap);
        tail.clear();
    }

    constexpr size_t window = 3;
    for (size_t start = 0; start + window <= words.size(); start += window) {
        if (rng.next_double() < rate) {
            for (size_t i = window; i > 1; --i) {
                const size_t j = static_cast<size_t>(rng.next_index(i));
                std::swap(words[start + i - 1], words[start + j]);
            }
        }
    }

    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        out += gaps[i];
        out += words[i];
    }
    out += tail;
    return out;
}

std::string apply_case_flip(const std::string& s, double rate, Rng& rng) {
    std::string out = s;
    for (char& c : out) {
        if (std::isalpha(static_cast<unsigned char>(c)) && rng.next_double() < rate) {
            const auto uc = static_cast<unsigned char>(c);
            c = std::isupper(uc) ? static_cast<char>(std::tolower(uc))
                                 : static_cast<char>(std::toupper(uc));
        }
    }
    return out;
}

std::multiset<std::string> placeholder_multiset(const std::string& body) {
    const auto names = placeholders(body);
    return {names.begin(), names.end()};
}

} // namespace

PromptTemplate perturb_template(const PromptTemplate& t, const PerturbSpec& spec) {
    spec.validate();
    const std::vector<Segment> segments = split_segments(t.body);
    const auto original_names = placeholder_multiset(t.body);

    Rng rng = derive_stream(spec.seed, "perturb");
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::string body;
        body.reserve(t.body.size());
        for (const auto& seg : segments) {
            if (seg.is_placeholder) {
                body += seg.text;
                continue;
            }
            std::string text = seg.text;
            for (PerturbOp op : spec.ops) {
                switch (op) {
                case PerturbOp::typo_swap: text = apply_typo_swap(text, spec.intensity, rng); break;
                case PerturbOp::char_drop: text = apply_char_drop(text, spec.intensity, rng); break;
                case PerturbOp::punctuation_jitter:
                    text = apply_punct_jitter(text, spec.intensity, rng);
                    break;
                case PerturbOp::word_shuffle_window:
                    text = apply_word_shuffle(text, spec.intensity, rng);
                    break;
                case PerturbOp::case_flip: text = apply_case_flip(text, spec.intensity, rng); break;
                }
            }
            body += text;
        }

        if (normalize_body(body).empty()) continue;
        if (placeholder_multiset(body) != original_names) continue;

        PromptTemplate out;
        out.id = "a" + hex64(fnv1a64(body));
        out.body = std::move(body);
        out.strategy = Strategy::adversarial;
        out.origin = t.origin;
        out.split = Split::adversarial;
        return out;
    }
    raise(ErrorCode::perturb_failed,
          "no valid perturbation of '" + t.id + "' after 100 attempts");
}

} // namespace paft
