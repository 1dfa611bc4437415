#include "augur/cassette.hpp"

#include <sstream>

#include "augur/domain.hpp"
#include "augur/errors.hpp"

namespace augur {

Cassette Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open cassette " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

Cassette Cassette::parse(std::string_view text, const std::string& source_name) {
  Cassette cassette;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      const json row = json::parse(line, nullptr, false);
      if (row.is_discarded() || !row.is_object()) {
        throw FormatError(source_name, line_no, "cassette entry is not a JSON object");
      }
      try {
        cassette.add(row.at("fingerprint").get<std::string>(), decode_response(row.at("response")));
      } catch (const std::exception& e) {
        throw FormatError(source_name, line_no, std::string("bad cassette entry: ") + e.what());
      }
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return cassette;
}

void Cassette::add(const std::string& fingerprint, ChatResponse response) {
  entries_[fingerprint].push_back(std::move(response));
}

const std::vector<ChatResponse>* Cassette::find(const std::string& fingerprint) const {
  auto it = entries_.find(fingerprint);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t Cassette::response_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, responses] : entries_) n += responses.size();
  return n;
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  const std::string fp = fingerprint(request);
  const auto* responses = cassette_.find(fp);
  if (responses == nullptr) throw CassetteMiss(fp);
  std::lock_guard lock(mutex_);
  std::size_t& cursor = cursors_[fp];
  if (cursor >= responses->size()) {
    throw CassetteMiss(fp, "all " + std::to_string(responses->size()) + " recorded responses consumed");
  }
  return (*responses)[cursor++];
}

RecordingBackend::RecordingBackend(Backend& inner, const std::filesystem::path& cassette_path)
    : inner_(inner), path_(cassette_path) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw ConfigError("cannot open cassette for recording: " + path_.string());
}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
  ChatResponse response = inner_.complete(request);
  nlohmann::json row;
  row["fingerprint"] = fingerprint(request);
  row["request"] = encode_request(request);
  row["response"] = encode_response(response);
  std::lock_guard lock(mutex_);
  out_ << row.dump() << '\n';
  out_.flush();
  if (!out_) throw ConfigError("cassette append failed: " + path_.string());
  return response;
}

}  // namespace augur
