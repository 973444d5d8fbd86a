#include "paft/client.hpp"

#include <cstdlib>
#include <map>
#include <vector>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>
#include <json.hpp>

#include "paft/error.hpp"
#include "paft/rng.hpp"
#include "paft/task.hpp"

namespace paft {

bool network_forbidden() {
    const char* v = std::getenv("PAFT_FORBID_NETWORK");
    return v != nullptr && v[0] != '\0' && std::string(v) != "0";
}

GeneratorClient::GeneratorClient(std::string identity, double timeout_seconds, int max_retries)
    : identity_(std::move(identity)), timeout_seconds_(timeout_seconds),
      max_retries_(max_retries) {
    if (timeout_seconds_ <= 0.0) raise(ErrorCode::invalid_argument, "timeout must be positive");
    if (max_retries_ < 0) raise(ErrorCode::invalid_argument, "max_retries must be >= 0");
}

std::string GeneratorClient::generate(const MetaPrompt& meta) {
    if (meta.requested_count < 1 || meta.text.empty()) {
        raise(ErrorCode::invalid_argument, "malformed meta prompt");
    }
    std::string last_error = "no attempt made";
    for (int attempt_no = 0; attempt_no <= max_retries_; ++attempt_no) {
        Attempt a = attempt(meta);
        if (a.ok) return a.payload;
        last_error = a.payload;
        if (!a.retryable) break;
    }
    raise(ErrorCode::endpoint_error, identity_ + ": " + last_error);
}

HttpGeneratorClient::HttpGeneratorClient(std::string base_url, std::string model,
                                         double timeout_seconds, int max_retries,
                                         std::string path)
    : GeneratorClient(base_url + " (" + model + ")", timeout_seconds, max_retries),
      base_url_(std::move(base_url)), model_(std::move(model)), path_(std::move(path)) {}

GeneratorClient::Attempt HttpGeneratorClient::attempt(const MetaPrompt& meta) {
    if (network_forbidden()) {
        raise(ErrorCode::network_forbidden,
              "network client invoked while PAFT_FORBID_NETWORK is set");
    }

    httplib::Client cli(base_url_);
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(timeout_seconds()));
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    if (const char* key = std::getenv("PAFT_API_KEY")) {
        cli.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
    }

    nlohmann::json body;
    body["model"] = model_;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", meta.text}}});

    auto res = cli.Post(path_, body.dump(), "application/json");
    Attempt a;
    if (!res) {
        a.retryable = true;
        a.payload = "transport error: " + httplib::to_string(res.error());
        return a;
    }
    if (res->status == 429 || res->status >= 500) {
        a.retryable = true;
        a.payload = "http status " + std::to_string(res->status);
        return a;
    }
    if (res->status != 200) {
        a.payload = "http status " + std::to_string(res->status) + ": " + res->body;
        return a;
    }
    try {
        auto j = nlohmann::json::parse(res->body);
        a.payload = j.at("choices").at(0).at("message").at("content").get<std::string>();
        a.ok = true;
    } catch (const nlohmann::json::exception& e) {
        a.payload = std::string("malformed completion body: ") + e.what();
    }
    return a;
}

namespace {

struct GrammarParts {
    std::vector<std::string> openers;
    std::vector<std::string> pollution_shapes; // %1/%2/%3 stand for theme words
    std::vector<std::string> leads;
    std::vector<std::string> option_styles;
    std::vector<std::string> suffixes;
};

const GrammarParts& pattern2_grammar() {
    static const GrammarParts parts{
        {
            "Sort the flagged word.",
            "A pattern drill.",
            "Judge the marked entry.",
            "One filing question.",
            "Weigh the repeated token.",
            "Classify the series end.",
            "Place the final item.",
            "A quick sorting check.",
            "Read and file the word.",
            "Decide where it belongs.",
        },
        {
            "",
            "Think of %1 and %1, never %2.",
            "Earlier drills used %1, %1 and %2.",
            "Ignore themes like %1 or %2.",
            "Some sets mention %1; %2 too.",
            "Classic examples: %1 and %2.",
            "Forget %1, %1; keep %2.",
        },
        {
            "Sequence: {pattern}",
            "Series given: {pattern}",
            "The chain reads {pattern}",
            "Observe: {pattern}",
            "Input line: {pattern}",
            "Given {pattern}",
        },
        {
            "A. {option_a} B. {option_b}",
            "A) {option_a} B) {option_b}",
            "(A) {option_a} (B) {option_b}",
            "Option A: {option_a} Option B: {option_b}",
            "A: {option_a} B: {option_b}",
            "choices: A {option_a} or B {option_b}",
        },
        {
            "Answer:",
            "Respond with A or B. Answer:",
            "Reply with a single letter. Answer:",
            "Your answer:",
            "Pick A or B. Answer:",
        },
    };
    return parts;
}

std::string fill_pollution(const std::string& shape, Rng& rng) {
    const Pattern2Words& words = pattern2_words();
    std::string out;
    out.reserve(shape.size() + 16);
    // %N repeats one theme word; the second distinct slot draws from the
    // other half so a single clause never skews far toward one label.
    std::map<char, std::string> drawn;
    bool first_half = rng.next_index(2) == 0;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] == '%' && i + 1 < shape.size() && shape[i + 1] >= '1' &&
            shape[i + 1] <= '9') {
            auto it = drawn.find(shape[i + 1]);
            if (it == drawn.end()) {
                if (!drawn.empty()) first_half = !first_half;
                const auto& pool = first_half ? words.cue_first_half : words.cue_second_half;
                it = drawn.emplace(shape[i + 1], pool[rng.next_index(pool.size())]).first;
            }
            out += it->second;
            ++i;
        } else {
            out.push_back(shape[i]);
        }
    }
    return out;
}

std::string draw_template_body(Rng& rng) {
    const GrammarParts& g = pattern2_grammar();
    std::string prose = g.openers[rng.next_index(g.openers.size())];
    const std::string clause =
        fill_pollution(g.pollution_shapes[rng.next_index(g.pollution_shapes.size())], rng);
    if (!clause.empty()) prose += " " + clause;

    const std::string lead = g.leads[rng.next_index(g.leads.size())];
    const std::string options = g.option_styles[rng.next_index(g.option_styles.size())];
    const std::string suffix = g.suffixes[rng.next_index(g.suffixes.size())];

    static const char* joiners[] = {"\n", " ", "\n"};
    const std::string j1 = joiners[rng.next_index(3)];
    const std::string j2 = joiners[rng.next_index(3)];
    return prose + j1 + lead + j2 + options + "\n" + suffix;
}

std::string jitter(const std::string& body, Rng& rng) {
    std::string out = body;
    if (rng.next_index(2) == 0 && !out.empty()) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
        size_t pos = out.find(". ");
        if (pos != std::string::npos) out.insert(pos + 1, " ");
    } else {
        out += "  ";
    }
    return out;
}

} // namespace

OfflineGenerator::OfflineGenerator(std::string family, uint64_t seed)
    : GeneratorClient("offline", 1.0, 0), family_(std::move(family)), state_(seed) {
    family_schema(family_); // rejects unknown families
    if (family_ != "pattern2") {
        raise(ErrorCode::unknown_family, "no offline grammar for family '" + family_ + "'");
    }
}

GeneratorClient::Attempt OfflineGenerator::attempt(const MetaPrompt& meta) {
    Rng rng = derive_stream(state_, "offline-gen/" + family_);
    splitmix64(state_); // advance so the next call draws fresh templates

    std::string raw;
    std::vector<std::string> emitted;
    for (int i = 1; i <= meta.requested_count; ++i) {
        std::string body;
        // A sampling model repeats itself now and then; reproduce that so
        // consumers cannot skip deduplication.
        if (!emitted.empty() && rng.next_index(8) == 0) {
            body = jitter(emitted[rng.next_index(emitted.size())], rng);
        } else {
            body = draw_template_body(rng);
        }
        emitted.push_back(body);
        raw += std::to_string(i) + ". " + body + "\n";
    }

    Attempt a;
    a.ok = true;
    a.payload = std::move(raw);
    return a;
}

std::unique_ptr<GeneratorClient> make_offline_generator(const std::string& family,
                                                        uint64_t seed) {
    return std::make_unique<OfflineGenerator>(family, seed);
}

} // namespace paft
