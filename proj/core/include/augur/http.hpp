#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace augur {

struct HttpRequest {
  std::string method = "GET";
  std::string url;  // absolute: scheme://host[:port]/path[?query]
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers;  // lower-cased names
  std::string body;

  std::optional<std::string> header(std::string_view name) const;
};

/// Minimal blocking HTTP client seam. Implementations throw TransportError
/// when no response was received at all.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (HTTP and HTTPS).
std::shared_ptr<HttpTransport> make_default_transport(std::chrono::seconds timeout = std::chrono::seconds{60});

/// Percent-encodes a query-string component.
std::string url_encode(std::string_view text);

struct UrlParts {
  std::string scheme_host_port;  // "https://api.example.com:443"
  std::string path_and_query;    // "/v1/x?y=z"
};
UrlParts split_url(std::string_view url);

/// Value of `name` in the query string of `url`, percent-decoded.
std::optional<std::string> query_param(std::string_view url, std::string_view name);

}  // namespace augur
