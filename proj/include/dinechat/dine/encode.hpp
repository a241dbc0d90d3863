#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dinechat/dine/record.hpp"

namespace dinechat::dine {

enum class DineKind {
  kState,
  kChosenAction,
  kQValues,
  kReward,
  kDominance,
  kUncertainty,
};

using DineKinds = std::vector<DineKind>;

// Everything a single-timestep explanation can use.
DineKinds all_kinds();
// Per-timestep trajectory summary: chosen action, dominance, uncertainty.
DineKinds compact_kinds();

std::string_view kind_name(DineKind kind);
DineKind parse_kind(std::string_view name);

// Rounds to two decimals; negative zero becomes zero.
double round2(double value);

// Channel with the largest displayed (two-decimal) dominance for the chosen
// action; lowest channel index on ties.
std::size_t dominant_channel(const TimestepRecord& record);
// Displayed gap between the dominant channel and the runner-up.
double dominance_margin(const TimestepRecord& record);

// Relative Reward Channel Dominance as the nested JSON object
//   {"<action>": {"<channel>": <value>, ...}, ...}
std::string encode_dominance(const TimestepRecord& record);

// Encodes DINEs for prompt consumption, numbers rounded to two decimals.
//  - empty kinds                    -> "[]"
//  - one record, kinds == dominance -> the bare dominance object
//  - one record                     -> one object with a "Timestep" key
//  - several records                -> array of such objects
std::string encode_dines(const std::vector<TimestepRecord>& records, const DineKinds& kinds);

// Inverse of encode_dines for the fields present in the text. Tables that
// were not encoded stay empty; `kinds_found` reports what was present.
std::vector<TimestepRecord> parse_dines(std::string_view text, DineKinds* kinds_found = nullptr);

}  // namespace dinechat::dine
