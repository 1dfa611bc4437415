#include "augur/transcript_store.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "augur/errors.hpp"

namespace augur {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

json encode_entry(const TranscriptIndexEntry& e) {
  json j;
  j["file"] = e.file;
  j["agent"] = e.agent_id;
  j["member"] = e.member;
  j["parent"] = e.parent.empty() ? json(nullptr) : json(e.parent);
  j["parent_step"] = e.parent_step ? json(*e.parent_step) : json(nullptr);
  j["task"] = e.task;
  return j;
}

TranscriptIndexEntry decode_entry(const json& j) {
  TranscriptIndexEntry e;
  e.file = j.at("file").get<std::string>();
  e.agent_id = j.at("agent").get<std::string>();
  e.member = j.at("member").get<int>();
  if (!j.at("parent").is_null()) e.parent = j.at("parent").get<std::string>();
  if (!j.at("parent_step").is_null()) e.parent_step = j.at("parent_step").get<std::size_t>();
  e.task = j.at("task").get<std::string>();
  return e;
}

}  // namespace

std::string safe_file_component(std::string_view id) {
  std::string out;
  for (unsigned char c : id) {
    out += (std::isalnum(c) || c == '.' || c == '_' || c == '-') ? static_cast<char>(c) : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string TranscriptStore::planner_ref(std::string_view question_id, int member) const {
  const std::string q = safe_file_component(question_id);
  return q + "/" + q + "." + std::to_string(member) + ".transcript";
}

void TranscriptStore::save(std::string_view question_id, const std::vector<TranscriptTree>& members) const {
  const std::string q = safe_file_component(question_id);
  const auto dir = root_ / q;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<json> index;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const int member = static_cast<int>(m);
    const std::string planner_file = planner_ref(question_id, member);
    write_text(root_ / planner_file, encode_transcript(members[m].planner).dump(2) + "\n");
    index.push_back(encode_entry({planner_file, members[m].planner.agent_id, member, {}, std::nullopt,
                                  members[m].planner.task}));
    for (std::size_t k = 0; k < members[m].children.size(); ++k) {
      const auto& child = members[m].children[k];
      const std::string file = q + "/" + q + "." + std::to_string(m) + "." + std::to_string(k) + ".transcript";
      write_text(root_ / file, encode_transcript(child.transcript).dump(2) + "\n");
      index.push_back(encode_entry({file, child.transcript.agent_id, member, planner_file, child.parent_step,
                                    child.transcript.task}));
    }
  }
  write_json_lines(dir / "index.jsonl", index);
}

std::vector<TranscriptIndexEntry> TranscriptStore::load_index(std::string_view question_id) const {
  const std::string q = safe_file_component(question_id);
  std::vector<TranscriptIndexEntry> out;
  for (const auto& row : read_json_lines(root_ / q / "index.jsonl")) out.push_back(decode_entry(row));
  return out;
}

Transcript TranscriptStore::load(const std::string& ref) const {
  std::ifstream in(root_ / ref, std::ios::binary);
  if (!in) throw ConfigError("cannot open transcript " + (root_ / ref).string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return decode_transcript(json::parse(buffer.str()));
  } catch (const json::exception& e) {
    throw FormatError((root_ / ref).string(), 1, e.what());
  }
}

}  // namespace augur
