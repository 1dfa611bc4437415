#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "augur/hierarchy.hpp"

namespace augur {

/// One line of a question's index.jsonl.
struct TranscriptIndexEntry {
  std::string file;
  std::string agent_id;
  int member = 0;
  std::string parent;  // planner file for child transcripts, empty otherwise
  std::optional<std::size_t> parent_step;
  std::string task;

  friend bool operator==(const TranscriptIndexEntry&, const TranscriptIndexEntry&) = default;
};

/// Layout under `root`:
///   {qid}/{qid}.{m}.transcript       planner (or single agent) of member m
///   {qid}/{qid}.{m}.{k}.transcript   k-th child of that planner
///   {qid}/index.jsonl                one TranscriptIndexEntry per file
/// Characters outside [A-Za-z0-9._-] in ids are replaced by '_'.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path root) : root_(std::move(root)) {}

  /// Relative path of the planner file for member `member`.
  std::string planner_ref(std::string_view question_id, int member) const;

  /// Writes every member tree of one question and rewrites its index.
  /// Throws ConfigError on write failures.
  void save(std::string_view question_id, const std::vector<TranscriptTree>& members) const;

  std::vector<TranscriptIndexEntry> load_index(std::string_view question_id) const;
  Transcript load(const std::string& ref) const;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

std::string safe_file_component(std::string_view id);

}  // namespace augur
