#include <gtest/gtest.h>

#include "augur/errors.hpp"
#include "augur/llm.hpp"

namespace augur {
namespace {

ChatRequest sample_request() {
  ChatRequest r;
  r.model_id = "gpt-4o";
  r.messages = {{Role::system, "You forecast."}, {Role::user, "Will it rain?"}};
  r.temperature = 0.5;
  r.stop_sequences = {"Observation:"};
  return r;
}

TEST(ChatRequest, Validation) {
  EXPECT_NO_THROW(sample_request().validate());
  ChatRequest r = sample_request();
  r.messages.clear();
  EXPECT_THROW(r.validate(), ConfigError);
  r = sample_request();
  r.messages.front().role = Role::assistant;
  EXPECT_THROW(r.validate(), ConfigError);
  r = sample_request();
  r.temperature = -0.1;
  EXPECT_THROW(r.validate(), ConfigError);
  r = sample_request();
  r.max_tokens = 0;
  EXPECT_THROW(r.validate(), ConfigError);
}

TEST(Fingerprint, IsStableHexSha256) {
  const std::string fp = fingerprint(sample_request());
  EXPECT_EQ(fp.size(), 64u);
  EXPECT_EQ(fp.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(fp, fingerprint(sample_request()));
}

TEST(Fingerprint, CoversContentButNotMaxTokens) {
  const std::string base = fingerprint(sample_request());
  ChatRequest r = sample_request();
  r.max_tokens = 100;
  EXPECT_EQ(fingerprint(r), base);

  r = sample_request();
  r.temperature = 0.7;
  EXPECT_NE(fingerprint(r), base);
  r = sample_request();
  r.model_id = "gpt-4";
  EXPECT_NE(fingerprint(r), base);
  r = sample_request();
  r.messages.back().content += " ";
  EXPECT_NE(fingerprint(r), base);
  r = sample_request();
  r.stop_sequences.clear();
  EXPECT_NE(fingerprint(r), base);
  r = sample_request();
  r.session = "q1#0";
  EXPECT_NE(fingerprint(r), base);
  ChatRequest other = sample_request();
  other.session = "q1#1";
  EXPECT_NE(fingerprint(r), fingerprint(other));
}

TEST(Codec, RequestAndResponseRoundTrip) {
  ChatRequest r = sample_request();
  r.max_tokens = 256;
  r.session = "q#2";
  EXPECT_EQ(decode_request(encode_request(r)), r);
  ChatResponse resp{"Final Answer: 0.4", {120, 7}, FinishReason::length};
  EXPECT_EQ(decode_response(encode_response(resp)), resp);
}

TEST(FinishReason, MapsProviderSpellings) {
  EXPECT_EQ(finish_reason_from_string("end_turn"), FinishReason::stop);
  EXPECT_EQ(finish_reason_from_string("max_tokens"), FinishReason::length);
  EXPECT_EQ(finish_reason_from_string("content_filter"), FinishReason::other);
}

class EchoBackend final : public Backend {
 public:
  ChatResponse complete(const ChatRequest& request) override { return {request.messages.back().content, {}, {}}; }
};

TEST(Complete, ValidatesBeforeForwarding) {
  EchoBackend echo;
  EXPECT_EQ(complete(echo, sample_request()).content, "Will it rain?");
  ChatRequest bad = sample_request();
  bad.messages.clear();
  EXPECT_THROW(complete(echo, bad), ConfigError);
}

}  // namespace
}  // namespace augur
