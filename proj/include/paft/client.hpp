#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "paft/prompt.hpp"

namespace paft {

/// Returns true when PAFT_FORBID_NETWORK is set; instrumented network
/// clients refuse to run in that state.
bool network_forbidden();

/// One generator endpoint. generate() retries retryable failures, issuing at
/// most max_retries + 1 attempts, each bounded by timeout_seconds.
class GeneratorClient {
public:
    GeneratorClient(std::string identity, double timeout_seconds, int max_retries);
    virtual ~GeneratorClient() = default;

    std::string generate(const MetaPrompt& meta);

    const std::string& identity() const { return identity_; }
    double timeout_seconds() const { return timeout_seconds_; }
    int max_retries() const { return max_retries_; }

protected:
    struct Attempt {
        bool ok = false;
        bool retryable = false;
        std::string payload; // raw text on success, error detail otherwise
    };

    virtual Attempt attempt(const MetaPrompt& meta) = 0;

private:
    std::string identity_;
    double timeout_seconds_;
    int max_retries_;
};

/// Chat-completions HTTP client. POSTs {"model", "messages"} to
/// base_url + path with the API key from PAFT_API_KEY, and reads
/// choices[0].message.content back. Throws NetworkForbidden when network
/// use is disabled.
class HttpGeneratorClient : public GeneratorClient {
public:
    HttpGeneratorClient(std::string base_url, std::string model,
                        double timeout_seconds = 30.0, int max_retries = 2,
                        std::string path = "/v1/chat/completions");

protected:
    Attempt attempt(const MetaPrompt& meta) override;

private:
    std::string base_url_;
    std::string model_;
    std::string path_;
};

/// Deterministic stand-in for a prompt-writing model: a seeded grammar over
/// instruction stems, pattern leads, option markers, and answer suffixes for
/// the given task family. Occasionally repeats an item with whitespace or
/// case jitter, the way a sampling model does, so downstream dedup is
/// exercised. Never touches the network.
class OfflineGenerator : public GeneratorClient {
public:
    OfflineGenerator(std::string family, uint64_t seed);

protected:
    Attempt attempt(const MetaPrompt& meta) override;

private:
    std::string family_;
    uint64_t state_;
};

std::unique_ptr<GeneratorClient> make_offline_generator(const std::string& family, uint64_t seed);

} // namespace paft
