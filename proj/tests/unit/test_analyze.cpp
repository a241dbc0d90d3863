#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "dinechat/analyze/question.hpp"
#include "dinechat/analyze/terms.hpp"
#include "dinechat/dine/encode.hpp"
#include "dinechat/error.hpp"
#include "dinechat/llm/mock_backend.hpp"
#include "test_support.hpp"

using namespace dinechat;
using namespace dinechat::analyze;

namespace {

std::vector<int> range(int a, int b) {
  std::vector<int> out;
  for (int t = a; t <= b; ++t) out.push_back(t);
  return out;
}

// Scripted backend answering every request with a fixed reply.
class FixedBackend : public llm::ChatBackend {
 public:
  explicit FixedBackend(std::string reply) : reply_(std::move(reply)) {}
  llm::Completion complete(const prompt::PromptSequence& seq,
                           const llm::CompletionParams& params) override {
    last = seq;
    llm::Completion c;
    c.responses.assign(static_cast<std::size_t>(params.n), reply_);
    return c;
  }
  std::string name() const override { return "fixed"; }
  prompt::PromptSequence last;

 private:
  std::string reply_;
};

}  // namespace

TEST(ParseTimesteps, SingleMentions) {
  EXPECT_EQ(parse_timesteps("What happened at timestep 5?").all, (std::vector<int>{5}));
  EXPECT_EQ(parse_timesteps("at time step 7").all, (std::vector<int>{7}));
  EXPECT_EQ(parse_timesteps("at t=3").all, (std::vector<int>{3}));
  EXPECT_EQ(parse_timesteps("at t5").all, (std::vector<int>{5}));
  EXPECT_EQ(parse_timesteps("At Step 12, why?").all, (std::vector<int>{12}));
  EXPECT_TRUE(parse_timesteps("Why add 2 servers?").all.empty());
  EXPECT_TRUE(parse_timesteps("How often was it uncertain?").all.empty());
}

TEST(ParseTimesteps, RangesAndLists) {
  EXPECT_EQ(parse_timesteps("timesteps 3 to 9").all, range(3, 9));
  EXPECT_EQ(parse_timesteps("between timesteps 0 and 20").all, range(0, 20));
  EXPECT_EQ(parse_timesteps("between t=4 and t=6").all, range(4, 6));
  EXPECT_EQ(parse_timesteps("from timestep 2 until timestep 4").all, range(2, 4));
  EXPECT_EQ(parse_timesteps("in timesteps 10-12").all, range(10, 12));
  EXPECT_EQ(parse_timesteps("in timesteps 10\xe2\x80\x93" "12").all, range(10, 12));
  EXPECT_EQ(parse_timesteps("steps 5 through 7").all, range(5, 7));
  EXPECT_EQ(parse_timesteps("timesteps 2, 7 and 11").all, (std::vector<int>{2, 7, 11}));
  EXPECT_EQ(parse_timesteps("timestep 9 or timestep 4").all, (std::vector<int>{4, 9}));
  // Reversed ranges are normalised.
  EXPECT_EQ(parse_timesteps("timesteps 9 to 7").all, range(7, 9));
}

TEST(ParseTimesteps, FocalTimesteps) {
  const auto r = parse_timesteps("between timesteps 3 and 8, and timestep 12");
  EXPECT_EQ(r.all, (std::vector<int>{3, 4, 5, 6, 7, 8, 12}));
  EXPECT_EQ(r.focal, (std::vector<int>{3, 8, 12}));
}

TEST(Classify, LabeledQuestionSet) {
  const auto fixture =
      nlohmann::json::parse(support::read_file(support::fixtures_dir() / "question_typing.json"));
  const int default_steps = fixture.at("trace_steps");
  DeterministicExtractor extractor;
  int checked = 0;
  for (const auto& q : fixture.at("questions")) {
    const std::string text = q.at("text");
    SCOPED_TRACE(text);
    const auto trace = support::synthetic_trace(q.value("trace_steps", default_steps));
    const auto a = analyze_question(text, extractor, trace);
    EXPECT_EQ(question_type_name(a.type), q.at("type").get<std::string>());
    const auto expected = q.contains("timesteps") ? q.at("timesteps").get<std::vector<int>>()
                                                  : range(q.at("from"), q.at("to"));
    EXPECT_EQ(a.timesteps, expected);
    EXPECT_EQ(a.defaulted, q.value("defaulted", false));
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(Classify, DefaultWindowAndClipping) {
  const auto trace = support::synthetic_trace(41);
  auto a = classify({}, trace);
  EXPECT_TRUE(a.defaulted);
  EXPECT_EQ(a.timesteps, range(20, 40));
  EXPECT_EQ(a.type, QuestionType::kB);
  EXPECT_TRUE(a.focal.empty());

  a = classify(parse_timesteps("timesteps 35 to 50"), trace);
  EXPECT_EQ(a.timesteps, range(35, 40));
  EXPECT_FALSE(a.defaulted);

  try {
    classify(parse_timesteps("timestep 99"), trace);
    FAIL();
  } catch (const OutOfRangeError& e) {
    EXPECT_NE(std::string(e.what()).find("0-40"), std::string::npos);
  }
  const auto small = support::synthetic_trace(1);
  a = classify({}, small);
  EXPECT_EQ(a.timesteps, (std::vector<int>{0}));
  EXPECT_EQ(a.type, QuestionType::kA);
}

TEST(QuestionSpec, Validation) {
  QuestionSpec q;
  EXPECT_THROW(q.validate(), ConfigError);
  q.text = "Which?";
  EXPECT_NO_THROW(q.validate());
  q.form = QuestionForm::kClosed;
  q.options = {"only one"};
  EXPECT_THROW(q.validate(), ConfigError);
  q.options.push_back("two");
  EXPECT_NO_THROW(q.validate());
  EXPECT_EQ(parse_form(form_name(QuestionForm::kClosed)), QuestionForm::kClosed);
  EXPECT_THROW(parse_form("multiple"), ConfigError);
}

TEST(ParseIntList, FindsFirstList) {
  std::vector<int> out;
  EXPECT_TRUE(parse_int_list("The timesteps are [3, 5, 9].", out));
  EXPECT_EQ(out, (std::vector<int>{3, 5, 9}));
  EXPECT_TRUE(parse_int_list("[]", out));
  EXPECT_TRUE(out.empty());
  EXPECT_FALSE(parse_int_list("none", out));
  EXPECT_FALSE(parse_int_list("[3, x]", out));
}

TEST(LlmExtractor, UsesReplyAndFallsBack) {
  auto backend = std::make_shared<FixedBackend>("Sure: [4, 5, 6]");
  llm::LlmGateway gateway(backend, {}, std::make_shared<llm::SimulatedClock>());
  LlmExtractor extractor(gateway, {});
  EXPECT_EQ(extractor.extract("what happened around the peak?").all, range(4, 6));
  ASSERT_EQ(backend->last.messages.size(), 1u);
  EXPECT_NE(backend->last.messages[0].text.find(kExtractionMarker), std::string::npos);
  EXPECT_EQ(extractor.fallbacks(), 0);

  auto silent = std::make_shared<FixedBackend>("I cannot tell.");
  llm::LlmGateway g2(silent, {}, std::make_shared<llm::SimulatedClock>());
  LlmExtractor fallback(g2, {});
  EXPECT_EQ(fallback.extract("why at timestep 3?").all, (std::vector<int>{3}));
  EXPECT_EQ(fallback.fallbacks(), 1);
}

TEST(SelectDines, TypeAUsesEveryKind) {
  const auto trace = support::synthetic_trace(21);
  const auto a = classify(parse_timesteps("timestep 4"), trace);
  const auto sel = select_dines(a, trace, 4000);
  EXPECT_EQ(sel.kinds, dine::all_kinds());
  ASSERT_EQ(sel.records.size(), 1u);
  EXPECT_EQ(sel.json, dine::encode_dines(sel.records, sel.kinds));
  EXPECT_EQ(sel.estimated_tokens, llm::TokenEstimator{}.guarded(sel.json));
}

TEST(SelectDines, TypeBDropsFarthestNonFocalFirst) {
  const auto trace = support::synthetic_trace(21);
  const auto a = classify(parse_timesteps("between timesteps 0 and 20"), trace);
  const auto full = select_dines(a, trace, 100000);
  EXPECT_EQ(full.kinds, dine::compact_kinds());
  EXPECT_EQ(full.records.size(), 21u);
  EXPECT_TRUE(full.dropped.empty());

  // Room for roughly half the records.
  const auto half = select_dines(a, trace, full.estimated_tokens / 2);
  EXPECT_LE(half.estimated_tokens, full.estimated_tokens / 2);
  EXPECT_FALSE(half.dropped.empty());
  // Focal endpoints 0 and 20 survive; the middle goes first.
  EXPECT_EQ(half.records.front().timestep, 0);
  EXPECT_EQ(half.records.back().timestep, 20);
  for (int t : half.dropped) {
    for (const auto& r : half.records) {
      if (r.timestep == 0 || r.timestep == 20) continue;
      EXPECT_LE(std::min(std::abs(r.timestep - 0), std::abs(r.timestep - 20)),
                std::min(std::abs(t - 0), std::abs(t - 20)));
    }
  }
}

TEST(SelectDines, TypeADropsQValuesThenFails) {
  const auto trace = support::synthetic_trace(21);
  const auto a = classify(parse_timesteps("timestep 4"), trace);
  const auto full = select_dines(a, trace, 100000);
  const auto lean = select_dines(a, trace, full.estimated_tokens - 1);
  EXPECT_TRUE(lean.q_values_dropped);
  EXPECT_EQ(lean.json.find("Q-Values"), std::string::npos);
  EXPECT_THROW(select_dines(a, trace, 5), BudgetError);
}

TEST(Terms, Tokens) {
  EXPECT_EQ(word_tokens("Didn't t5 add-Server?"),
            (std::vector<std::string>{"didn't", "t", "5", "add", "server"}));
}

TEST(Terms, FindActions) {
  auto m = find_actions("The agent added a server, then did not lower the dimmer.");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].canonical, "Add Server");
  EXPECT_FALSE(m[0].negated);
  EXPECT_EQ(m[1].canonical, "Decrease Dimmer");
  EXPECT_TRUE(m[1].negated);
  EXPECT_EQ(first_affirmed(m), "Add Server");
  EXPECT_EQ(first_affirmed(find_actions("It chose No Adaptation.")), "No Adaptation");
  EXPECT_EQ(first_affirmed(find_actions("servers were removed")), "Remove Server");
  EXPECT_EQ(first_affirmed(find_actions("Increase Dimmer")), "Increase Dimmer");
  EXPECT_FALSE(first_affirmed(find_actions("It did not add a server.")).has_value());
  EXPECT_TRUE(find_actions("the weather was nice").empty());
}

TEST(Terms, FindChannels) {
  auto m = find_channels("Not revenue but user satisfaction and costs.");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0].canonical, "Revenue");
  EXPECT_TRUE(m[0].negated);
  EXPECT_EQ(first_affirmed(m), "User Satisfaction");
  EXPECT_EQ(m[2].canonical, "Costs");
}

TEST(Terms, FirstCount) {
  EXPECT_EQ(first_count("There are 4 matching timesteps."), 4);
  EXPECT_EQ(first_count("Between timesteps 0 and 20 it was uncertain three times."), 3);
  EXPECT_EQ(first_count("At timestep 5 it happened twice"), 2);
  EXPECT_EQ(first_count("None of them."), 0);
  EXPECT_EQ(first_count("uncertain at (13, 16) so 2 times"), 2);
  EXPECT_EQ(first_count("from t=3 to t=9: 5"), 5);
  EXPECT_FALSE(first_count("Score 0.93 only").has_value());
  EXPECT_FALSE(first_count("no numbers here").has_value());
}
