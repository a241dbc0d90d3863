#include "dinechat/analyze/question.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <set>

#include "dinechat/dine/trace_store.hpp"
#include "dinechat/error.hpp"

namespace dinechat::analyze {
namespace {

struct Token {
  enum Kind { kWord, kNumber, kPunct } kind;
  std::string text;
  int value = 0;
};

// Lower-cased words, integers and the punctuation the grammar cares about.
// "t5" splits into "t" "5" and "time step" merges into "timestep".
std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char ch = static_cast<unsigned char>(text[i]);
    if (std::isdigit(ch)) {
      std::size_t j = i;
      long value = 0;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
        value = std::min(value * 10 + (text[j] - '0'), 1000000000L);
        ++j;
      }
      out.push_back({Token::kNumber, std::string(text.substr(i, j - i)), static_cast<int>(value)});
      i = j;
    } else if (std::isalpha(ch)) {
      std::size_t j = i;
      while (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) ||
                                 text[j] == '\'' || text[j] == '_')) {
        ++j;
      }
      std::string word(text.substr(i, j - i));
      std::transform(word.begin(), word.end(), word.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if ((word == "step" || word == "steps") && !out.empty() && out.back().kind == Token::kWord &&
          out.back().text == "time") {
        out.back().text = word == "step" ? "timestep" : "timesteps";
      } else {
        out.push_back({Token::kWord, word});
      }
      i = j;
    } else if (ch == ',' || ch == '-' || ch == '=') {
      out.push_back({Token::kPunct, std::string(1, static_cast<char>(ch))});
      ++i;
    } else if (ch == 0xE2 && i + 2 < text.size() &&
               static_cast<unsigned char>(text[i + 1]) == 0x80 &&
               (static_cast<unsigned char>(text[i + 2]) == 0x93 ||
                static_cast<unsigned char>(text[i + 2]) == 0x94)) {
      out.push_back({Token::kPunct, "-"});  // en/em dash
      i += 3;
    } else {
      if (!std::isspace(ch)) out.push_back({Token::kPunct, std::string(1, static_cast<char>(ch))});
      ++i;
    }
  }
  return out;
}

bool is_anchor(const Token& t) {
  return t.kind == Token::kWord &&
         (t.text == "timestep" || t.text == "timesteps" || t.text == "step" ||
          t.text == "steps" || t.text == "t" || t.text == "ts");
}

bool is_word(const std::vector<Token>& toks, std::size_t i, std::string_view w) {
  return i < toks.size() && toks[i].kind == Token::kWord && toks[i].text == w;
}

bool is_punct(const std::vector<Token>& toks, std::size_t i, std::string_view p) {
  return i < toks.size() && toks[i].kind == Token::kPunct && toks[i].text == p;
}

// Skips an optional anchor and '=' before a number.
std::size_t skip_anchor(const std::vector<Token>& toks, std::size_t i) {
  if (i < toks.size() && is_anchor(toks[i])) ++i;
  if (is_punct(toks, i, "=")) ++i;
  return i;
}

}  // namespace

std::string_view form_name(QuestionForm form) {
  return form == QuestionForm::kOpen ? "open" : "closed";
}

QuestionForm parse_form(std::string_view name) {
  if (name == "open") return QuestionForm::kOpen;
  if (name == "closed") return QuestionForm::kClosed;
  throw ConfigError("question form must be 'open' or 'closed', got '" + std::string(name) + "'");
}

void QuestionSpec::validate() const {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError("question must not be empty");
  }
  if (form == QuestionForm::kClosed && options.size() < 2) {
    throw ConfigError("closed questions need at least two options");
  }
}

ExplicitTimesteps parse_timesteps(std::string_view question) {
  const auto toks = tokenize(question);
  std::set<int> all;
  std::set<int> focal;
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!is_anchor(toks[i])) {
      ++i;
      continue;
    }
    bool between = i > 0 && is_word(toks, i - 1, "between");
    std::size_t j = i + 1;
    if (is_word(toks, j, "between")) {
      between = true;
      ++j;
    } else if (is_word(toks, j, "from")) {
      ++j;
    }
    if (is_punct(toks, j, "=")) ++j;
    if (j >= toks.size() || toks[j].kind != Token::kNumber) {
      ++i;
      continue;
    }
    int previous = toks[j].value;
    all.insert(previous);
    focal.insert(previous);
    ++j;
    bool first_connector = true;
    while (j < toks.size()) {
      bool range = false;
      if (is_word(toks, j, "to") || is_word(toks, j, "through") || is_word(toks, j, "until") ||
          is_word(toks, j, "till") || is_punct(toks, j, "-")) {
        range = true;
      } else if (is_word(toks, j, "and")) {
        range = between && first_connector;
      } else if (!(is_punct(toks, j, ",") || is_word(toks, j, "or"))) {
        break;
      }
      std::size_t k = j + 1;
      if (is_word(toks, k, "and") || is_word(toks, k, "or")) ++k;  // ", and 11"
      k = skip_anchor(toks, k);
      if (k >= toks.size() || toks[k].kind != Token::kNumber) break;
      const int value = toks[k].value;
      if (range) {
        for (int t = std::min(previous, value); t <= std::max(previous, value); ++t) all.insert(t);
      } else {
        all.insert(value);
      }
      focal.insert(value);
      previous = value;
      first_connector = false;
      j = k + 1;
    }
    i = j;
  }
  return {{all.begin(), all.end()}, {focal.begin(), focal.end()}};
}

ExplicitTimesteps DeterministicExtractor::extract(std::string_view question) {
  return parse_timesteps(question);
}

std::string extraction_prompt(std::string_view question) {
  return std::string(kExtractionMarker) +
         " Expand ranges inclusively. Reply only with a JSON array of integers, or [] if the "
         "question names no timestep.\nQuestion: " +
         std::string(question);
}

bool parse_int_list(std::string_view text, std::vector<int>& out) {
  const auto open = text.find('[');
  if (open == std::string_view::npos) return false;
  const auto close = text.find(']', open);
  if (close == std::string_view::npos) return false;
  std::vector<int> values;
  std::string_view body = text.substr(open + 1, close - open - 1);
  std::size_t i = 0;
  while (i < body.size()) {
    const char ch = body[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      ++i;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    long value = 0;
    while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
      value = std::min(value * 10 + (body[i] - '0'), 1000000000L);
      ++i;
    }
    values.push_back(static_cast<int>(value));
  }
  out = std::move(values);
  return true;
}

LlmExtractor::LlmExtractor(llm::LlmGateway& gateway, llm::CompletionParams params)
    : gateway_(gateway), params_(std::move(params)) {
  params_.n = 1;
}

ExplicitTimesteps LlmExtractor::extract(std::string_view question) {
  prompt::PromptSequence seq;
  seq.messages.push_back({prompt::Role::kUser, extraction_prompt(question)});
  const auto reply = gateway_.chat_complete(seq, params_);
  std::vector<int> values;
  if (reply.responses.empty() || !parse_int_list(reply.responses.front(), values)) {
    ++fallbacks_;
    std::clog << "[analyzer] unparseable timestep list from chatbot; using deterministic "
                 "extractor\n";
    return fallback_.extract(question);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  // The chatbot does not report which timesteps were endpoints.
  return {values, values};
}

QuestionAnalysis classify(const ExplicitTimesteps& extracted, const dine::DecisionTrace& trace) {
  if (trace.records.empty()) throw ConfigError("trace '" + trace.trace_id + "' is empty");
  const int first = trace.first_timestep();
  const int last = trace.last_timestep();
  QuestionAnalysis a;
  if (extracted.all.empty()) {
    a.defaulted = true;
    for (int t = std::max(first, last - kDefaultWindow); t <= last; ++t) a.timesteps.push_back(t);
  } else {
    for (int t : extracted.all) {
      if (t >= first && t <= last) a.timesteps.push_back(t);
    }
    for (int t : extracted.focal) {
      if (t >= first && t <= last) a.focal.push_back(t);
    }
    if (a.timesteps.empty()) {
      throw OutOfRangeError("question refers to timesteps outside the trace; valid range is " +
                            std::to_string(first) + "-" + std::to_string(last));
    }
  }
  a.type = a.timesteps.size() == 1 ? QuestionType::kA : QuestionType::kB;
  return a;
}

QuestionAnalysis analyze_question(std::string_view question, TimestepExtractor& extractor,
                                  const dine::DecisionTrace& trace) {
  return classify(extractor.extract(question), trace);
}

DineSelection select_dines(const QuestionAnalysis& analysis, const dine::DecisionTrace& trace,
                           int token_budget, const llm::TokenEstimator& estimator) {
  DineSelection sel;
  sel.records = dine::slice(trace, analysis.timesteps);
  sel.kinds = analysis.type == QuestionType::kA ? dine::all_kinds() : dine::compact_kinds();

  auto encode = [&] {
    sel.json = dine::encode_dines(sel.records, sel.kinds);
    sel.estimated_tokens = estimator.guarded(sel.json);
    return sel.estimated_tokens <= token_budget;
  };
  if (encode()) return sel;

  std::vector<int> focal = analysis.focal;
  if (focal.empty()) focal.push_back(analysis.timesteps.back());
  auto distance = [&focal](int t) {
    int best = std::abs(t - focal.front());
    for (int f : focal) best = std::min(best, std::abs(t - f));
    return best;
  };
  // Non-focal timesteps, farthest from the focal set first, oldest on ties;
  // then focal ones oldest first, always keeping one record.
  std::vector<int> order;
  for (const auto& r : sel.records) {
    if (std::find(focal.begin(), focal.end(), r.timestep) == focal.end()) order.push_back(r.timestep);
  }
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const int dx = distance(x);
    const int dy = distance(y);
    return dx != dy ? dx > dy : x < y;
  });
  for (const auto& r : sel.records) {
    if (std::find(focal.begin(), focal.end(), r.timestep) != focal.end()) order.push_back(r.timestep);
  }

  for (int t : order) {
    if (sel.records.size() <= 1) break;
    std::erase_if(sel.records, [t](const dine::TimestepRecord& r) { return r.timestep == t; });
    sel.dropped.push_back(t);
    if (encode()) return sel;
  }

  auto drop_kind = [&sel](dine::DineKind k) {
    std::erase(sel.kinds, k);
  };
  if (std::find(sel.kinds.begin(), sel.kinds.end(), dine::DineKind::kQValues) != sel.kinds.end()) {
    drop_kind(dine::DineKind::kQValues);
    sel.q_values_dropped = true;
    if (encode()) return sel;
  }
  if (sel.kinds != dine::compact_kinds()) {
    sel.kinds = dine::compact_kinds();
    if (encode()) return sel;
  }
  throw BudgetError("DINE budget of " + std::to_string(token_budget) +
                    " tokens cannot hold a single timestep (needs " +
                    std::to_string(sel.estimated_tokens) + ")");
}

}  // namespace dinechat::analyze
