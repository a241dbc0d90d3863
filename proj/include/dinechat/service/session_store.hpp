#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

namespace dinechat::service {

// Append-only session logs at <root>/sessions/<id>.jsonl: a header line,
// then one {"kind":"exchange","request":...,"response":...} line per ask.
// Appends to distinct sessions proceed in parallel.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);

  std::string create();
  bool exists(const std::string& session_id) const;
  void append(const std::string& session_id, const nlohmann::json& request,
              const nlohmann::json& response);
  // {"session_id", "created_at", "exchanges": [...]}; NotFoundError if absent.
  nlohmann::json load(const std::string& session_id) const;

 private:
  std::filesystem::path path_for(const std::string& session_id) const;
  std::shared_ptr<std::mutex> lock_for(const std::string& session_id);

  std::filesystem::path dir_;
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace dinechat::service
