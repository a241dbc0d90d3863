#include "dinechat/service/session_store.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

#include "dinechat/error.hpp"

namespace dinechat::service {
namespace {

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

SessionStore::SessionStore(std::filesystem::path root) : dir_(std::move(root) / "sessions") {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path SessionStore::path_for(const std::string& session_id) const {
  if (!valid_id(session_id)) throw NotFoundError("unknown session '" + session_id + "'");
  return dir_ / (session_id + ".jsonl");
}

std::shared_ptr<std::mutex> SessionStore::lock_for(const std::string& session_id) {
  std::lock_guard guard(registry_mutex_);
  auto& slot = locks_[session_id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

std::string SessionStore::create() {
  static thread_local std::mt19937_64 rng(std::random_device{}() ^
                                          static_cast<std::uint64_t>(
                                              std::chrono::steady_clock::now().time_since_epoch().count()));
  std::string id;
  do {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    id = std::string("s-") + buf;
  } while (std::filesystem::exists(path_for(id)));
  const auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  std::ofstream out(path_for(id));
  if (!out) throw Error("cannot create session file in " + dir_.string());
  out << nlohmann::json{{"kind", "session"}, {"session_id", id}, {"created_at", utc_now()}}.dump()
      << '\n';
  return id;
}

bool SessionStore::exists(const std::string& session_id) const {
  return valid_id(session_id) && std::filesystem::exists(dir_ / (session_id + ".jsonl"));
}

void SessionStore::append(const std::string& session_id, const nlohmann::json& request,
                          const nlohmann::json& response) {
  if (!exists(session_id)) throw NotFoundError("unknown session '" + session_id + "'");
  const auto lock = lock_for(session_id);
  std::lock_guard guard(*lock);
  std::ofstream out(path_for(session_id), std::ios::app);
  out << nlohmann::json{{"kind", "exchange"}, {"request", request}, {"response", response}}.dump()
      << '\n';
  out.flush();
  if (!out) throw Error("cannot append to session '" + session_id + "'");
}

nlohmann::json SessionStore::load(const std::string& session_id) const {
  if (!exists(session_id)) throw NotFoundError("unknown session '" + session_id + "'");
  std::ifstream in(path_for(session_id));
  nlohmann::json out{{"session_id", session_id}, {"exchanges", nlohmann::json::array()}};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;  // torn final line after a crash
    if (j.value("kind", "") == "session") {
      out["created_at"] = j.value("created_at", "");
    } else if (j.value("kind", "") == "exchange") {
      out["exchanges"].push_back({{"request", j["request"]}, {"response", j["response"]}});
    }
  }
  return out;
}

}  // namespace dinechat::service
