#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "augur/llm.hpp"

namespace augur {

/// Recorded chat exchanges keyed by request fingerprint. Responses for one
/// fingerprint keep their recording order.
///
/// On disk a cassette is line-delimited JSON, one exchange per line:
/// `{"fingerprint": ..., "request": {...}, "response": {...}}`.
class Cassette {
 public:
  Cassette() = default;

  /// Throws FormatError naming the 1-based line of the first bad entry.
  static Cassette load(const std::filesystem::path& path);
  static Cassette parse(std::string_view text, const std::string& source_name = "<cassette>");

  void add(const std::string& fingerprint, ChatResponse response);
  const std::vector<ChatResponse>* find(const std::string& fingerprint) const;

  std::size_t fingerprint_count() const noexcept { return entries_.size(); }
  std::size_t response_count() const noexcept;

 private:
  std::map<std::string, std::vector<ChatResponse>> entries_;
};

/// Serves recorded responses. Repeated identical requests get successive
/// entries; running past the last one is a CassetteMiss.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}

  ChatResponse complete(const ChatRequest& request) override;

 private:
  Cassette cassette_;
  std::mutex mutex_;
  std::map<std::string, std::size_t> cursors_;
};

/// Forwards to an inner backend and appends every exchange to a cassette
/// file. Appends are serialized.
class RecordingBackend final : public Backend {
 public:
  /// Throws ConfigError when the path cannot be opened for appending.
  RecordingBackend(Backend& inner, const std::filesystem::path& cassette_path);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  Backend& inner_;
  std::filesystem::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace augur
