#include "dinechat/analyze/terms.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace dinechat::analyze {
namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '\''; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

bool is_negation(const std::string& w) {
  if (w == "not" || w == "never" || w == "didnt" || w == "wasnt" || w == "isnt") return true;
  return w.size() > 3 && w.ends_with("n't");
}

bool negated_at(const std::vector<std::string>& toks, std::size_t pos) {
  const std::size_t from = pos >= 3 ? pos - 3 : 0;
  for (std::size_t i = pos; i-- > from;) {
    // "not X but Y": the contrast ends the negation's scope.
    if (toks[i] == "but" || toks[i] == "rather" || toks[i] == "instead") return false;
    if (is_negation(toks[i])) return true;
  }
  return false;
}

bool in(const std::set<std::string, std::less<>>& s, const std::string& w) { return s.count(w) > 0; }

const std::set<std::string, std::less<>> kAddVerbs = {"add", "adds", "added", "adding", "addition"};
const std::set<std::string, std::less<>> kRemoveVerbs = {"remove", "removes", "removed",
                                                         "removing", "removal"};
const std::set<std::string, std::less<>> kIncreaseVerbs = {"increase", "increases", "increased",
                                                           "increasing", "raise", "raises",
                                                           "raised", "raising"};
const std::set<std::string, std::less<>> kDecreaseVerbs = {
    "decrease", "decreases", "decreased", "decreasing", "lower", "lowers",
    "lowered",  "lowering",  "reduce",    "reduces",    "reduced", "reducing"};
const std::set<std::string, std::less<>> kServerNouns = {"server", "servers"};
const std::set<std::string, std::less<>> kDimmerNouns = {"dimmer"};

struct ActionRule {
  const char* canonical;
  const std::set<std::string, std::less<>>* verbs;
  const std::set<std::string, std::less<>>* nouns;
};

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    if (is_letter(text[i])) {
      while (j < text.size() && is_letter(text[j])) ++j;
    } else if (is_digit(text[i])) {
      while (j < text.size() && is_digit(text[j])) ++j;
    } else {
      ++i;
      continue;
    }
    out.push_back(to_lower(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::vector<TermMention> find_actions(std::string_view text) {
  static const std::array<ActionRule, 4> rules = {{
      {"Add Server", &kAddVerbs, &kServerNouns},
      {"Remove Server", &kRemoveVerbs, &kServerNouns},
      {"Increase Dimmer", &kIncreaseVerbs, &kDimmerNouns},
      {"Decrease Dimmer", &kDecreaseVerbs, &kDimmerNouns},
  }};
  const auto toks = word_tokens(text);
  std::vector<TermMention> out;
  for (std::size_t v = 0; v < toks.size(); ++v) {
    for (const auto& rule : rules) {
      if (!in(*rule.verbs, toks[v])) continue;
      const std::size_t lo = v >= 3 ? v - 3 : 0;
      const std::size_t hi = std::min(toks.size(), v + 4);
      for (std::size_t n = lo; n < hi; ++n) {
        if (in(*rule.nouns, toks[n])) {
          const std::size_t pos = std::min(v, n);
          out.push_back({rule.canonical, pos, negated_at(toks, pos)});
          break;
        }
      }
    }
    const bool no_adapt = toks[v] == "noop" ||
                          (toks[v] == "no" && v + 1 < toks.size() &&
                           (toks[v + 1] == "adaptation" || toks[v + 1] == "op"));
    if (no_adapt) out.push_back({"No Adaptation", v, negated_at(toks, v)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TermMention& a, const TermMention& b) { return a.position < b.position; });
  return out;
}

std::vector<TermMention> find_channels(std::string_view text) {
  const auto toks = word_tokens(text);
  std::vector<TermMention> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string& w = toks[i];
    const char* canonical = nullptr;
    std::size_t pos = i;
    if (w == "satisfaction") {
      canonical = "User Satisfaction";
      if (i > 0 && toks[i - 1] == "user") pos = i - 1;
    } else if (w == "revenue" || w == "revenues") {
      canonical = "Revenue";
    } else if (w == "cost" || w == "costs") {
      canonical = "Costs";
    }
    if (canonical != nullptr) out.push_back({canonical, pos, negated_at(toks, pos)});
  }
  return out;
}

std::optional<std::string> first_affirmed(const std::vector<TermMention>& mentions) {
  for (const auto& m : mentions) {
    if (!m.negated) return m.canonical;
  }
  return std::nullopt;
}

std::optional<int> first_count(std::string_view text) {
  static const std::array<std::string_view, 21> kWords = {
      "zero",    "one",     "two",     "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",    "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};
  static const std::set<std::string, std::less<>> kTimestepWords = {
      "timestep", "timesteps", "step", "steps", "t", "ts", "between",
      "and",      "to",        "from", "through", "until", "till"};
  int depth = 0;
  std::string previous;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '(' || c == '[') {
      ++depth;
      ++i;
      continue;
    }
    if (c == ')' || c == ']') {
      depth = std::max(0, depth - 1);
      ++i;
      continue;
    }
    std::size_t j = i;
    std::optional<int> value;
    std::string word;
    if (is_digit(c)) {
      while (j < text.size() && is_digit(text[j])) ++j;
      // "3.5" or "1,000" are not counts of timesteps.
      if (j + 1 < text.size() && (text[j] == '.' || text[j] == ',') && is_digit(text[j + 1])) {
        while (j < text.size() && (is_digit(text[j]) || text[j] == '.' || text[j] == ',')) ++j;
        i = j;
        previous.clear();
        continue;
      }
      word = std::string(text.substr(i, j - i));
      if (word.size() <= 6) value = std::stoi(word);
    } else if (is_letter(c)) {
      while (j < text.size() && is_letter(text[j])) ++j;
      word = to_lower(text.substr(i, j - i));
      for (std::size_t k = 0; k < kWords.size(); ++k) {
        if (word == kWords[k]) value = static_cast<int>(k);
      }
      if (word == "once") value = 1;
      if (word == "twice") value = 2;
      if (word == "none") value = 0;
    } else {
      ++i;
      continue;
    }
    if (value && depth == 0 && !in(kTimestepWords, previous)) return value;
    previous = word;
    i = j;
  }
  return std::nullopt;
}

}  // namespace dinechat::analyze
