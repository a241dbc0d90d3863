#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "dinechat/error.hpp"
#include "dinechat/llm/clock.hpp"
#include "dinechat/llm/gateway.hpp"
#include "dinechat/llm/http_backend.hpp"
#include "dinechat/llm/mock_backend.hpp"
#include "dinechat/llm/rate_budget.hpp"
#include "dinechat/llm/tokens.hpp"
#include "test_support.hpp"

using namespace dinechat;
using namespace dinechat::llm;
using prompt::PromptSequence;
using prompt::Role;

namespace {

PromptSequence one_message(std::string text) {
  PromptSequence s;
  s.messages.push_back({Role::kUser, std::move(text)});
  return s;
}

// Counts calls; fails the first `failures` of them with a transient error.
class FlakyBackend : public ChatBackend {
 public:
  FlakyBackend(int failures, long tokens) : failures_(failures), tokens_(tokens) {}
  Completion complete(const PromptSequence&, const CompletionParams& params) override {
    ++calls;
    if (calls <= failures_) throw TransientBackendError("HTTP 503", 503);
    Completion c;
    c.responses.assign(static_cast<std::size_t>(params.n), "ok");
    c.usage.prompt_tokens = tokens_;
    return c;
  }
  std::string name() const override { return "flaky"; }
  int calls = 0;

 private:
  int failures_;
  long tokens_;
};

class WrongCountBackend : public ChatBackend {
 public:
  Completion complete(const PromptSequence&, const CompletionParams&) override {
    return Completion{{"only one"}, {}};
  }
  std::string name() const override { return "wrong"; }
};

// Clock that records each sleep.
class RecordingClock : public Clock {
 public:
  double now() override { return now_; }
  void sleep_for(double s) override {
    sleeps.push_back(s);
    now_ += s;
  }
  std::vector<double> sleeps;

 private:
  double now_ = 0.0;
};

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    if (value) {
      ::setenv(name, value, 1);
    } else {
      ::unsetenv(name);
    }
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

}  // namespace

TEST(Tokens, Estimates) {
  EXPECT_EQ(estimate_tokens(""), 0);
  EXPECT_EQ(estimate_tokens("abc"), 1);
  EXPECT_EQ(estimate_tokens("abcd"), 1);
  EXPECT_EQ(estimate_tokens("abcde"), 2);
  TokenEstimator est;
  EXPECT_EQ(est.guarded(std::string(40, 'x')), 11);   // 10 * 1.1
  EXPECT_EQ(est.guarded(std::string(44, 'x')), 13);   // ceil(12.1)
  PromptSequence s;
  s.messages = {{Role::kSystem, std::string(40, 'x')}, {Role::kUser, "hi"}};
  EXPECT_EQ(est.sequence(s), 11 + 4 + 2 + 4);
  EXPECT_EQ(raw_sequence_tokens(s), 10 + 4 + 1 + 4);
}

TEST(CompletionParams, Validation) {
  CompletionParams p;
  EXPECT_NO_THROW(p.validate());
  p.n = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.temperature = 2.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.top_p = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  const auto parsed = CompletionParams::from_config(
      KeyValueConfig::parse("llm.n = 3\nllm.max_token = 200\nllm.temperature = 0.5\n"));
  EXPECT_EQ(parsed.n, 3);
  EXPECT_EQ(parsed.max_tokens, 200);
  EXPECT_DOUBLE_EQ(parsed.temperature, 0.5);
}

TEST(RateBudget, SlidingWindowArithmetic) {
  RateBudget b(100, 60.0);
  EXPECT_TRUE(b.try_acquire(40, 0.0).granted);
  EXPECT_TRUE(b.try_acquire(40, 10.0).granted);
  auto d = b.try_acquire(40, 20.0);
  EXPECT_FALSE(d.granted);
  EXPECT_DOUBLE_EQ(d.wait_seconds, 40.0);  // first entry leaves at 60
  EXPECT_EQ(b.used(20.0), 80);
  d = b.try_acquire(90, 20.0);
  EXPECT_DOUBLE_EQ(d.wait_seconds, 50.0);  // both entries must leave
  EXPECT_FALSE(b.try_acquire(40, 59.999).granted);
  EXPECT_TRUE(b.try_acquire(40, 60.0).granted);
  EXPECT_EQ(b.used(60.0), 80);
  EXPECT_THROW(b.try_acquire(101, 0.0), BudgetError);
  EXPECT_THROW(b.try_acquire(-1, 0.0), ConfigError);
  EXPECT_THROW(RateBudget(0), ConfigError);
}

TEST(RateBudget, SettleReplacesReservation) {
  RateBudget b(100, 60.0);
  const auto d = b.try_acquire(90, 0.0);
  b.settle(d.permit, 30);
  EXPECT_EQ(b.used(1.0), 30);
  EXPECT_TRUE(b.try_acquire(70, 1.0).granted);
  const auto ledger = b.ledger();
  ASSERT_EQ(ledger.size(), 2u);
  EXPECT_EQ(ledger[0].tokens, 30);
}

TEST(Gateway, RejectsOversizedPrompts) {
  auto backend = std::make_shared<FlakyBackend>(0, 1);
  LlmGateway gw(backend, {}, std::make_shared<SimulatedClock>());
  CompletionParams p;
  p.max_tokens = 350;
  // 4096 - 350 - 4 overhead = 3742 guarded tokens -> 3401 raw -> 13604 chars.
  EXPECT_EQ(gw.check_request(one_message(std::string(13604, 'x')), p), 3746);
  try {
    gw.chat_complete(one_message(std::string(13605, 'x')), p);
    FAIL();
  } catch (const PromptTooLargeError& e) {
    EXPECT_EQ(e.max_tokens(), 350);
    EXPECT_EQ(e.cap(), 4096);
    EXPECT_GT(e.prompt_tokens() + e.max_tokens(), 4096);
  }
  EXPECT_EQ(backend->calls, 0);
}

TEST(Gateway, ReservesReplyBudgetPerChoiceThenSettles) {
  auto backend = std::make_shared<FlakyBackend>(0, 123);
  auto clock = std::make_shared<SimulatedClock>();
  GatewayOptions opt;
  opt.wait_for_budget = false;
  opt.tokens_per_minute = 2000;
  LlmGateway gw(backend, opt, clock);
  CompletionParams p;
  p.n = 6;
  p.max_tokens = 350;
  // 6 * 350 reply tokens can never fit a 2000 token window.
  EXPECT_THROW(gw.chat_complete(one_message("hello"), p), BudgetError);
  p.n = 5;
  const auto c = gw.chat_complete(one_message("hello"), p);
  EXPECT_EQ(c.responses.size(), 5u);
  EXPECT_EQ(gw.budget().used(clock->now()), 123);
}

TEST(Gateway, WaitsOrFailsFastWhenBudgetIsExhausted) {
  auto clock = std::make_shared<RecordingClock>();
  GatewayOptions opt;
  opt.tokens_per_minute = 1000;
  auto backend = std::make_shared<FlakyBackend>(0, 950);
  LlmGateway waiting(backend, opt, clock);
  CompletionParams p;
  p.max_tokens = 100;
  waiting.chat_complete(one_message("a"), p);
  clock->sleep_for(5.0);
  waiting.chat_complete(one_message("a"), p);
  ASSERT_EQ(clock->sleeps.size(), 2u);
  EXPECT_DOUBLE_EQ(clock->sleeps[1], 55.0);

  opt.wait_for_budget = false;
  LlmGateway fast(backend, opt, clock, waiting.shared_budget());
  try {
    fast.chat_complete(one_message("a"), p);
    FAIL();
  } catch (const RateLimitedError& e) {
    EXPECT_DOUBLE_EQ(e.retry_after(), 60.0);
  }
}

TEST(Gateway, RetriesTransientFailuresWithBackoff) {
  auto clock = std::make_shared<RecordingClock>();
  auto backend = std::make_shared<FlakyBackend>(2, 10);
  LlmGateway gw(backend, {}, clock);
  EXPECT_EQ(gw.chat_complete(one_message("a"), {}).responses.front(), "ok");
  EXPECT_EQ(backend->calls, 3);
  EXPECT_EQ(clock->sleeps, (std::vector<double>{1.0, 2.0}));

  auto dead = std::make_shared<FlakyBackend>(100, 10);
  LlmGateway gw2(dead, {}, clock);
  try {
    gw2.chat_complete(one_message("a"), {});
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.attempts().size(), 3u);
  }
  EXPECT_EQ(dead->calls, 3);
  // A failed request gives its reservation back.
  EXPECT_EQ(gw2.budget().used(clock->now()), 0);
}

class DeniedBackend : public ChatBackend {
 public:
  Completion complete(const PromptSequence&, const CompletionParams&) override {
    ++calls;
    throw CredentialError("HTTP 401");
  }
  std::string name() const override { return "denied"; }
  int calls = 0;
};

TEST(Gateway, CredentialErrorsAreNotRetriedAndRelease) {
  auto backend = std::make_shared<DeniedBackend>();
  auto clock = std::make_shared<SimulatedClock>();
  LlmGateway gw(backend, {}, clock);
  EXPECT_THROW(gw.chat_complete(one_message("a"), {}), CredentialError);
  EXPECT_EQ(backend->calls, 1);
  EXPECT_EQ(gw.budget().used(clock->now()), 0);
}

TEST(Gateway, RejectsWrongResponseCount) {
  LlmGateway gw(std::make_shared<WrongCountBackend>(), {}, std::make_shared<SimulatedClock>());
  CompletionParams p;
  p.n = 2;
  EXPECT_THROW(gw.chat_complete(one_message("a"), p), GatewayError);
}

TEST(MockBackend, DigestAndScripts) {
  const auto a = one_message("hello");
  auto b = one_message("hello");
  b.messages[0].role = Role::kSystem;
  EXPECT_EQ(prompt_digest(a).size(), 64u);
  EXPECT_EQ(prompt_digest(a), prompt_digest(one_message("hello")));
  EXPECT_NE(prompt_digest(a), prompt_digest(b));

  MockBackend mock(std::map<std::string, std::vector<std::string>>{{prompt_digest(a), {"x", "y"}}});
  CompletionParams p;
  p.n = 3;
  EXPECT_EQ(mock.complete(a, p).responses, (std::vector<std::string>{"x", "y", "x"}));
  EXPECT_THROW(mock.complete(b, p), GatewayError);

  support::TempDir dir;
  support::write_file(dir / "script.json",
                      nlohmann::json{{prompt_digest(b), {"z"}}}.dump());
  auto loaded = MockBackend::from_file((dir / "script.json").string());
  EXPECT_EQ(loaded.complete(b, {}).responses.front(), "z");
  support::write_file(dir / "bad.json", "[1,2]");
  EXPECT_THROW(MockBackend::from_file((dir / "bad.json").string()), ParseError);
}

TEST(HttpBackend, RequestBodyAndResponseParsing) {
  PromptSequence s;
  s.messages = {{Role::kSystem, "sys"}, {Role::kUser, "usr"}};
  CompletionParams p;
  p.n = 2;
  auto body = nlohmann::json::parse(build_chat_request(s, p));
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "usr");
  EXPECT_EQ(body["n"], 2);
  EXPECT_EQ(body["max_tokens"], 350);
  EXPECT_FALSE(body.contains("top_p"));
  p.temperature = 0.5;
  p.top_p = 0.8;
  body = nlohmann::json::parse(build_chat_request(s, p));
  EXPECT_EQ(body["top_p"], 0.8);

  const auto c = parse_chat_response(
      R"({"choices":[{"message":{"content":"a"}},{"message":{"content":"b"}}],)"
      R"("usage":{"prompt_tokens":7,"completion_tokens":3}})");
  EXPECT_EQ(c.responses, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c.usage.total(), 10);
  EXPECT_THROW(parse_chat_response("{}"), GatewayError);
}

TEST(HttpBackend, CredentialComesFromEnvironment) {
  {
    ScopedEnv unset(kApiKeyEnv, nullptr);
    EXPECT_THROW(HttpBackend(HttpBackendOptions{}), CredentialError);
  }
  ScopedEnv set(kApiKeyEnv, "test-key");
  EXPECT_NO_THROW(HttpBackend(HttpBackendOptions{}));
}

TEST(HttpBackend, TalksToCompatibleEndpoint) {
  httplib::Server server;
  std::atomic<int> status{200};
  std::string seen_auth, seen_path;
  server.Post(R"(/v1/chat/completions)", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_path = req.path;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply = {{"choices", nlohmann::json::array()},
                            {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 1}}}};
    for (int i = 0; i < body["n"].get<int>(); ++i) {
      reply["choices"].push_back({{"message", {{"role", "assistant"}, {"content", "fine"}}}});
    }
    res.status = status;
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendOptions opt;
  opt.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  opt.timeout_seconds = 5;
  HttpBackend backend(opt, "secret");
  CompletionParams p;
  p.n = 2;
  const auto c = backend.complete(one_message("hi"), p);
  EXPECT_EQ(c.responses, (std::vector<std::string>{"fine", "fine"}));
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_path, "/v1/chat/completions");

  status = 401;
  EXPECT_THROW(backend.complete(one_message("hi"), p), CredentialError);
  status = 503;
  EXPECT_THROW(backend.complete(one_message("hi"), p), TransientBackendError);
  status = 400;
  EXPECT_THROW(backend.complete(one_message("hi"), p), GatewayError);

  server.stop();
  t.join();
  opt.base_url = "no-scheme";
  EXPECT_THROW(HttpBackend(opt, "k").complete(one_message("hi"), p), ConfigError);
}
