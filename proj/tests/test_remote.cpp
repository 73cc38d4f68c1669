#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ebd/error.hpp"
#include "ebd/llm_client.hpp"
#include "ebd/remote_reward.hpp"
#include "ebd/sampler.hpp"
#include "support/stub_server.hpp"

using namespace ebd;
using ebd::test::StubServer;
using nlohmann::json;

namespace {

std::string completion_body(const std::string& text, int prompt_tokens = 5,
                            int completion_tokens = 3, const std::string& finish = "stop") {
  return json{{"choices", {{{"text", text}, {"finish_reason", finish}}}},
              {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}}
      .dump();
}

EndpointConfig endpoint(const StubServer& server) {
  EndpointConfig c;
  c.base_url = server.url();
  c.model_name = "base-model";
  c.timeout_s = 5;
  c.retry_backoff_s = 0.01;
  return c;
}

struct SleepLog {
  std::vector<double> seconds;
  void attach(JsonPoster& poster) {
    poster.set_sleeper([this](std::chrono::duration<double> d) { seconds.push_back(d.count()); });
  }
};

}  // namespace

TEST_CASE("full sample returns the canned completion byte for byte") {
  const std::string canned = "  The answer is \\boxed{42}.\n\u00e9";
  StubServer server([&](const auto&, auto& res, int) {
    res.set_content(completion_body(canned), "application/json");
  });
  const LlmClient client(endpoint(server));
  const auto out = client.sample_full({"Q: ", "", 0.7, 1, {}});
  CHECK(out.text == canned);
  CHECK(out.usage.prompt_tokens == 5);
  CHECK(out.usage.completion_tokens == 3);
  CHECK(out.usage.retries == 0);

  const auto body = json::parse(server.seen().at(0).body);
  CHECK(server.seen().at(0).path == "/v1/completions");
  CHECK(body["model"] == "base-model");
  CHECK(body["max_tokens"] == 1);
  CHECK(client.totals().requests == 1);
}

TEST_CASE("length-truncated completions are flagged") {
  StubServer server([](const auto&, auto& res, int) {
    res.set_content(completion_body("x", 1, 1, "length"), "application/json");
  });
  const LlmClient client(endpoint(server));
  CHECK(client.sample_full({"p", "", 1.0, 1, {}}).usage.truncated);
}

TEST_CASE("two failures then success is recorded as two retries") {
  StubServer server([](const auto&, auto& res, int call) {
    if (call <= 2) {
      res.status = 503;
      res.set_content(R"({"error": {"message": "busy"}})", "application/json");
      return;
    }
    res.set_content(completion_body("ok"), "application/json");
  });
  auto config = endpoint(server);
  config.max_retries = 3;
  config.retry_backoff_s = 0.2;
  LlmClient client(config);
  SleepLog sleeps;
  sleeps.attach(client.transport());
  const auto out = client.sample_full({"p", "", 1.0, 8, {}});
  CHECK(out.text == "ok");
  CHECK(out.usage.retries == 2);
  CHECK(server.seen().size() == 3);
  REQUIRE(sleeps.seconds.size() == 2);
  CHECK(sleeps.seconds[0] >= 0.0);
  CHECK(sleeps.seconds[0] <= 0.2);
  CHECK(sleeps.seconds[1] <= 0.4);
  CHECK(client.totals().retries == 2);
}

TEST_CASE("rate limiting is retried and exhaustion is a backend error") {
  StubServer server([](const auto&, auto& res, int) { res.status = 429; });
  auto config = endpoint(server);
  config.max_retries = 2;
  LlmClient client(config);
  SleepLog sleeps;
  sleeps.attach(client.transport());
  try {
    client.sample_full({"p", "", 1.0, 8, {}});
    FAIL("expected exhaustion");
  } catch (const BackendUnavailable& e) {
    CHECK(e.attempts() == 3);
  }
  CHECK(server.seen().size() == 3);
  CHECK(sleeps.seconds.size() == 2);
}

TEST_CASE("client errors are rejected without retry and carry the server message") {
  StubServer server([](const auto&, auto& res, int) {
    res.status = 400;
    res.set_content(R"({"error": {"message": "max_tokens too large"}})", "application/json");
  });
  const LlmClient client(endpoint(server));
  try {
    client.sample_full({"p", "", 1.0, 8, {}});
    FAIL("expected rejection");
  } catch (const RequestRejected& e) {
    CHECK(e.status() == 400);
    CHECK(e.server_message() == "max_tokens too large");
  }
  CHECK(server.seen().size() == 1);
}

TEST_CASE("unreachable endpoints exhaust retries") {
  std::string url;
  {
    StubServer gone([](const auto&, auto&, int) {});
    url = gone.url();
  }
  EndpointConfig config;
  config.base_url = url;
  config.timeout_s = 1;
  config.max_retries = 1;
  LlmClient client(config);
  SleepLog sleeps;
  sleeps.attach(client.transport());
  CHECK_THROWS_AS(client.sample_full({"p", "", 1.0, 8, {}}), BackendUnavailable);
  CHECK(sleeps.seconds.size() == 1);
}

TEST_CASE("latency accounting covers a delayed response") {
  StubServer server([](const auto&, auto& res, int) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    res.set_content(completion_body("slow"), "application/json");
  });
  const LlmClient client(endpoint(server));
  const auto out = client.sample_full({"p", "", 1.0, 8, {}});
  CHECK(out.usage.wall_ms >= 50.0);
  CHECK(client.totals().wall_ms >= 50.0);
}

TEST_CASE("suffix requests carry prompt plus prefix and the matched decoding settings") {
  StubServer server([](const auto&, auto& res, int) {
    res.set_content(completion_body(" world", 9, 2), "application/json");
  });
  const LlmClient client(endpoint(server));
  const RemoteGenerator generator(client);
  DecodeConfig config;
  config.temperature = 0.6;
  config.max_len = 100;
  config.stop = {"\n\n", "</s>"};
  Rng rng(0);

  const TextResponse prefix{"Hello", 30};
  const auto out = generator.sample_suffix("Say hi: ", prefix, config, rng);
  CHECK(out.text == "Hello world");
  CHECK(out.token_count == 32);

  const auto body = json::parse(server.seen().at(0).body);
  CHECK(body["prompt"] == "Say hi: Hello");
  CHECK(body["temperature"] == 0.6);
  CHECK(body["stop"] == json::array({"\n\n", "</s>"}));
  CHECK(body["max_tokens"] == 70);

  // Without a known token count the prefix is estimated at 4 chars/token.
  generator.sample_suffix("Say hi: ", {"abcdefghi", std::nullopt}, config, rng);
  CHECK(json::parse(server.seen().at(1).body)["max_tokens"] == 97);

  // A prefix that fills the budget is returned without a request.
  const auto full = generator.sample_suffix("Say hi: ", {"Hello", 100}, config, rng);
  CHECK(full.text == "Hello");
  CHECK(server.seen().size() == 2);
}

TEST_CASE("a stop-terminated prefix still issues a suffix request") {
  StubServer server([](const auto&, auto& res, int) {
    res.set_content(completion_body("", 9, 0), "application/json");
  });
  const LlmClient client(endpoint(server));
  const auto out = client.sample_suffix({"p", "done.", 1.0, 16, {"."}});
  CHECK(out.text == "done.");
  CHECK(server.seen().size() == 1);
}

TEST_CASE("full samples use the whole length budget") {
  StubServer server([](const auto&, auto& res, int) {
    res.set_content(completion_body("a b c", 3, 3), "application/json");
  });
  const LlmClient client(endpoint(server));
  const RemoteGenerator generator(client);
  DecodeConfig config;
  config.max_len = 64;
  Rng rng(0);
  const auto out = generator.sample_full("p", config, rng);
  CHECK(out.token_count == 3);
  CHECK(json::parse(server.seen().at(0).body)["max_tokens"] == 64);
}

TEST_CASE("bearer token comes from the named environment variable") {
  StubServer server([](const auto&, auto& res, int) {
    res.set_content(completion_body("x"), "application/json");
  });
  auto config = endpoint(server);
  config.auth_token_env = "EBD_TEST_TOKEN";
  ::setenv("EBD_TEST_TOKEN", "sekret", 1);
  const LlmClient client(config);
  client.sample_full({"p", "", 1.0, 1, {}});
  CHECK(server.seen().at(0).authorization == "Bearer sekret");

  config.auth_token_env = "EBD_TEST_TOKEN_MISSING";
  ::unsetenv("EBD_TEST_TOKEN_MISSING");
  CHECK_THROWS_AS(LlmClient{config}, InputDomainError);
}

TEST_CASE("audit mirror writes one line per attempt") {
  const auto audit = std::filesystem::temp_directory_path() / "ebd_audit_test.jsonl";
  std::filesystem::remove(audit);
  StubServer server([](const auto&, auto& res, int call) {
    if (call == 1) {
      res.status = 500;
      return;
    }
    res.set_content(completion_body("x"), "application/json");
  });
  auto config = endpoint(server);
  config.audit_path = audit;
  {
    LlmClient client(config);
    SleepLog sleeps;
    sleeps.attach(client.transport());
    client.sample_full({"p", "", 1.0, 1, {}});
  }
  std::ifstream in(audit);
  std::vector<json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(json::parse(line));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["status"] == 500);
  CHECK(lines[1]["status"] == 200);
  CHECK(lines[1]["attempt"] == 2);
  std::filesystem::remove(audit);
}

TEST_CASE("request and endpoint validation") {
  CHECK_THROWS_AS(GenerationRequest({"p", "", 0.0, 1, {}}).validate(), InputDomainError);
  CHECK_THROWS_AS(GenerationRequest({"p", "", 1.0, 0, {}}).validate(), InputDomainError);
  EndpointConfig c;
  c.base_url = "http://127.0.0.1:1";
  c.max_retries = 11;
  CHECK_THROWS_AS(c.validate(), InputDomainError);
  c.max_retries = 3;
  c.timeout_s = 0;
  CHECK_THROWS_AS(c.validate(), InputDomainError);
}

TEST_CASE("remote reward scoring") {
  StubServer server([](const httplib::Request& req, auto& res, int) {
    const auto body = json::parse(req.body);
    if (body["response"] == "bad") {
      res.set_content(R"({"reward": "high"})", "application/json");
      return;
    }
    res.set_content(json{{"reward", body["response"].get<std::string>().size() * 0.5}}.dump(),
                    "application/json");
  });
  const RemoteReward reward(endpoint(server));
  CHECK(reward.score("q", {"abcd", {}}).raw() == 2.0);
  CHECK(server.seen().at(0).path == "/score");
  CHECK(json::parse(server.seen().at(0).body) == json{{"prompt", "q"}, {"response", "abcd"}});
  CHECK_THROWS_AS(reward.score("q", {"bad", {}}), DataError);
}

TEST_CASE("an EBD chain over the remote protocol makes pool_size + steps calls") {
  std::atomic<int> n{0};
  StubServer gen_server([&](const auto&, auto& res, int) {
    res.set_content(completion_body(" w" + std::to_string(n++ % 5) + " end", 4, 2),
                    "application/json");
  });
  StubServer reward_server([](const httplib::Request& req, auto& res, int) {
    const auto text = json::parse(req.body)["response"].get<std::string>();
    res.set_content(json{{"reward", double(text.size())}}.dump(), "application/json");
  });
  const LlmClient client(endpoint(gen_server));
  const RemoteGenerator generator(client);
  const RemoteReward reward(endpoint(reward_server));
  DecodeConfig config;
  config.steps = 6;
  config.max_len = 64;
  const auto result = run_ebd<TextDomain>(generator, reward, "p", config);
  CHECK(gen_server.seen().size() == 10);
  CHECK(reward_server.seen().size() == 10);
  CHECK(result.state.calls == CallCounters{10, 10});
  for (const auto& seen : gen_server.seen()) {
    const auto body = json::parse(seen.body);
    CHECK(body["prompt"].get<std::string>().rfind("p", 0) == 0);
  }
}
