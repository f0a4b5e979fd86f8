#include "reflab/gateway/gateway.hpp"
#include "reflab/judge/judge.hpp"
#include "reflab/support/errors.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "helpers.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>
#include <unistd.h>

using namespace reflab;
using nlohmann::json;

namespace {

std::filesystem::path temp_cassette(const std::string& stem) {
    return std::filesystem::temp_directory_path() /
           ("reflab_cassette_" + stem + "_" + std::to_string(::getpid()) + ".json");
}

prompt::RenderedPrompt make_prompt(const std::string& text, const std::string& id = "s1") {
    prompt::RenderedPrompt p;
    p.text = text;
    p.scenario_id = id;
    p.strategy = prompt::Strategy::zero_shot;
    p.template_version = "v1+test";
    return p;
}

// Serves an OpenAI-shaped chat completion endpoint for the tests.
class MockProvider {
public:
    MockProvider() {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         handle(req, res);
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockProvider() {
        server_.stop();
        thread_.join();
    }

    std::string api_base() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    }

    int requests() const { return requests_.load(); }

    std::atomic<int> reject_with_429{0}; // fail this many requests first
    std::string required_bearer;         // when set, mismatch -> 401

private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        requests_.fetch_add(1);
        if (!required_bearer.empty() &&
            req.get_header_value("Authorization") != "Bearer " + required_bearer) {
            res.status = 401;
            res.set_content(R"({"error":"bad key"})", "application/json");
            return;
        }
        if (reject_with_429.load() > 0) {
            reject_with_429.fetch_sub(1);
            res.status = 429;
            res.set_content(R"({"error":"slow down"})", "application/json");
            return;
        }
        json body = json::parse(req.body);
        std::string prompt_text = body["messages"][0]["content"];
        json reply = {
            {"id", "mock-1"},
            {"model", body["model"]},
            {"choices", json::array({{{"message",
                                       {{"role", "assistant"},
                                        {"content", "echo: " + prompt_text.substr(0, 16)}}},
                                      {"finish_reason", "stop"}}})}};
        res.set_content(reply.dump(), "application/json");
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
};

gateway::ModelConfig mock_config(const MockProvider& provider) {
    gateway::ModelConfig config;
    config.model_name = "mock-model";
    config.api_base = provider.api_base();
    config.max_retries = 3;
    config.retry_backoff_ms = 1.0;
    config.timeout_seconds = 5.0;
    return config;
}

} // namespace

TEST_CASE("prompt hash is the sha256 of the prompt bytes") {
    CHECK(gateway::prompt_hash("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(gateway::prompt_hash("abc") == gateway::prompt_hash("abc"));
    CHECK(gateway::prompt_hash("abc") != gateway::prompt_hash("abd"));
}

TEST_CASE("cassette stores, saves, and reloads responses by run") {
    auto path = temp_cassette("roundtrip");
    std::filesystem::remove(path);
    {
        auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::record);
        cassette.store("hash-a", 1, "first");
        cassette.store("hash-a", 3, "third");
        cassette.store("hash-b", 1, "other");
        CHECK(cassette.entry_count() == 3);
        cassette.save();
    }
    auto reloaded = gateway::Cassette::open(path, gateway::CassetteMode::replay);
    CHECK(reloaded.entry_count() == 3);
    REQUIRE(reloaded.lookup("hash-a", 1).has_value());
    CHECK(*reloaded.lookup("hash-a", 1) == "first");
    CHECK_FALSE(reloaded.lookup("hash-a", 2).has_value()); // null slot
    CHECK(*reloaded.lookup("hash-a", 3) == "third");
    CHECK_FALSE(reloaded.lookup("hash-c", 1).has_value());
    std::filesystem::remove(path);
}

TEST_CASE("replay mode refuses to open a missing cassette") {
    CHECK_THROWS_AS(gateway::Cassette::open(temp_cassette("missing"),
                                            gateway::CassetteMode::replay),
                    reflab::CassetteMissError);
}

TEST_CASE("replay returns recorded text byte-identically and never the network") {
    auto path = temp_cassette("replay");
    std::filesystem::remove(path);
    auto prompt = make_prompt("refactor this\nplease");
    {
        auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::record);
        cassette.store(gateway::prompt_hash(prompt.text), 2, "recorded \xF0\x9F\x8E\x84 text");
        cassette.save();
    }
    auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::replay);
    gateway::ModelConfig config;
    config.model_name = "never-contacted";
    config.api_base = "http://127.0.0.1:1/v1"; // unroutable on purpose

    auto record = gateway::complete(prompt, config, 2, &cassette);
    CHECK(record.raw_text == "recorded \xF0\x9F\x8E\x84 text");
    CHECK(record.run_index == 2);
    CHECK(record.prompt_hash == gateway::prompt_hash(prompt.text));

    CHECK_THROWS_AS(gateway::complete(prompt, config, 1, &cassette),
                    reflab::CassetteMissError);
    std::filesystem::remove(path);
}

TEST_CASE("record mode hits the provider and fills the cassette") {
    MockProvider provider;
    auto path = temp_cassette("record");
    std::filesystem::remove(path);
    auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::record);
    auto prompt = make_prompt("apply Extract Method");

    auto record = gateway::complete(prompt, mock_config(provider), 1, &cassette);
    CHECK(record.raw_text == "echo: apply Extract Me");
    CHECK(record.provider_meta.at("response_id") == "mock-1");
    CHECK(record.provider_meta.at("finish_reason") == "stop");
    CHECK(record.latency_ms >= 0.0);
    CHECK(cassette.entry_count() == 1);
    cassette.save();

    auto replay = gateway::Cassette::open(path, gateway::CassetteMode::replay);
    auto replayed = gateway::complete(prompt, mock_config(provider), 1, &replay);
    CHECK(replayed.raw_text == record.raw_text);
    CHECK(provider.requests() == 1);
    std::filesystem::remove(path);
}

TEST_CASE("transient provider failures are retried with backoff") {
    MockProvider provider;
    provider.reject_with_429 = 2;
    auto prompt = make_prompt("retry me");
    auto record = gateway::complete(prompt, mock_config(provider), 1, nullptr);
    CHECK(record.raw_text == "echo: retry me");
    CHECK(provider.requests() == 3);
}

TEST_CASE("exhausted retries surface as a transport error") {
    MockProvider provider;
    provider.reject_with_429 = 100;
    auto config = mock_config(provider);
    config.max_retries = 2;
    auto message = thrown_message<reflab::TransportError>(
        [&] { gateway::complete(make_prompt("x"), config, 1, nullptr); });
    CHECK(message.find("429") != std::string::npos);
    CHECK(provider.requests() == 3);
}

TEST_CASE("auth failures do not retry") {
    MockProvider provider;
    provider.required_bearer = "right-key";
    ::setenv("REFLAB_TEST_KEY", "wrong-key", 1);
    auto config = mock_config(provider);
    config.credential_env = "REFLAB_TEST_KEY";
    CHECK_THROWS_AS(gateway::complete(make_prompt("x"), config, 1, nullptr),
                    reflab::TransportError);
    CHECK(provider.requests() == 1);

    ::setenv("REFLAB_TEST_KEY", "right-key", 1);
    auto record = gateway::complete(make_prompt("x"), config, 1, nullptr);
    CHECK(record.raw_text.substr(0, 5) == "echo:");
}

TEST_CASE("a missing credential variable is a configuration error") {
    ::unsetenv("REFLAB_ABSENT_KEY");
    gateway::ModelConfig config;
    config.model_name = "m";
    config.api_base = "http://127.0.0.1:1/v1";
    config.credential_env = "REFLAB_ABSENT_KEY";
    CHECK_THROWS_AS(gateway::complete(make_prompt("x"), config, 1, nullptr),
                    reflab::ConfigurationError);
    CHECK_THROWS_AS(gateway::make_adapter(config), reflab::ConfigurationError);
    config.credential_env.clear();
    config.provider_id = "carrier-pigeon";
    CHECK_THROWS_AS(gateway::make_adapter(config), reflab::ConfigurationError);
}

TEST_CASE("run_batch records partial failures instead of dropping runs") {
    prompt::TemplateStore store = prompt::TemplateStore::load(REFLAB_TEMPLATE_DIR);
    corpus::Catalog catalog;
    corpus::CatalogEntry entry;
    entry.name = "Extract Method";
    entry.mechanics_steps = {"Do the extraction."};
    catalog.entries["EXTRACT METHOD"] = entry;

    corpus::RefactoringScenario scenario;
    scenario.id = "s9";
    scenario.refactoring_type = "Extract Method";
    scenario.before_code = "int f() { return 1; }";

    auto rendered = prompt::render(prompt::Strategy::zero_shot, scenario, &entry, store);
    auto path = temp_cassette("batch");
    std::filesystem::remove(path);
    {
        auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::record);
        cassette.store(gateway::prompt_hash(rendered.text), 1, "out one");
        cassette.store(gateway::prompt_hash(rendered.text), 2, "out two");
        cassette.save();
    }
    auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::replay);
    gateway::ModelConfig config;
    config.model_name = "m";
    config.api_base = "http://127.0.0.1:1/v1";

    std::vector<std::string> warnings;
    auto records = gateway::run_batch(scenario, prompt::Strategy::zero_shot, catalog, store,
                                      config, 3, &cassette, &warnings);
    REQUIRE(records.size() == 3);
    CHECK(records[0].run_index == 1);
    CHECK(records[0].raw_text == "out one");
    CHECK_FALSE(records[0].failed);
    CHECK(records[1].raw_text == "out two");
    CHECK(records[2].failed);
    CHECK(records[2].failure_reason.find("cassette-miss") != std::string::npos);

    auto none = gateway::run_batch(scenario, prompt::Strategy::zero_shot, catalog, store,
                                   config, 0, &cassette, &warnings);
    CHECK(none.empty());
    CHECK_FALSE(warnings.empty());
    std::filesystem::remove(path);
}

TEST_CASE("judge prompt embeds both codes and the verdict instruction") {
    prompt::TemplateStore store = prompt::TemplateStore::load(REFLAB_TEMPLATE_DIR);
    std::string text = judge::render_judge_prompt(store, "int before() {}",
                                                  "int after() {}", "Extract Method");
    CHECK(text.find("int before() {}") != std::string::npos);
    CHECK(text.find("int after() {}") != std::string::npos);
    CHECK(text.find("Extract Method") != std::string::npos);
    CHECK(text.find("$<") == std::string::npos);
    std::string tail = "Answer 1 if it was a success, 0 if it was a failure, and nothing else.";
    REQUIRE(text.size() >= tail.size());
    CHECK(text.substr(text.size() - tail.size()) == tail);
}

TEST_CASE("verdict parsing is strict") {
    CHECK(judge::parse_verdict("1") == true);
    CHECK(judge::parse_verdict("0\n") == false);
    CHECK(judge::parse_verdict("  1  ") == true);
    CHECK_FALSE(judge::parse_verdict("I think 1").has_value());
    CHECK_FALSE(judge::parse_verdict("10").has_value());
    CHECK_FALSE(judge::parse_verdict("").has_value());
}

TEST_CASE("judging replays verdicts and enforces cross-model judging") {
    prompt::TemplateStore store = prompt::TemplateStore::load(REFLAB_TEMPLATE_DIR);
    judge::JudgeRequest request;
    request.scenario_id = "s1";
    request.strategy = "zero_shot";
    request.before_code = "int f() { return 1; }";
    request.after_code = "int f() { return ONE; }";
    request.refactoring_type = "Extract Variable";
    request.generator_model = "generator-model";

    gateway::ModelConfig judge_config;
    judge_config.model_name = "generator-model";
    CHECK_THROWS_AS(judge::judge(request, judge_config, store, nullptr),
                    reflab::ConfigurationError);

    judge_config.model_name = "judge-model";
    judge_config.api_base = "http://127.0.0.1:1/v1";
    std::string judge_prompt = judge::render_judge_prompt(
        store, request.before_code, request.after_code, request.refactoring_type);

    auto path = temp_cassette("judge");
    std::filesystem::remove(path);
    {
        auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::record);
        cassette.store(gateway::prompt_hash(judge_prompt), 1, " 1 \n");
        cassette.store(gateway::prompt_hash(judge_prompt), 2, "certainly!");
        cassette.save();
    }
    auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::replay);

    auto verdict = judge::judge(request, judge_config, store, &cassette);
    REQUIRE(verdict.verdict.has_value());
    CHECK(*verdict.verdict == true);
    CHECK(verdict.judge_model == "judge-model");
    CHECK(verdict.raw_reply == " 1 \n");

    request.run_index = 2;
    auto unparseable = judge::judge(request, judge_config, store, &cassette);
    CHECK(unparseable.parse_failed());
    CHECK(unparseable.raw_reply == "certainly!");
    std::filesystem::remove(path);
}
