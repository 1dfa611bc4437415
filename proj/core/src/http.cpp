#include "augur/http.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <httplib.h>

#include "augur/errors.hpp"

namespace augur {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string url_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '+') {
      out += ' ';
    } else if (text[i] == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += text[i];
    }
  }
  return out;
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse send(const HttpRequest& request) override {
    const UrlParts parts = split_url(request.url);
    httplib::Client client(parts.scheme_host_port);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (lower(k) == "content-type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }

    httplib::Result result = [&] {
      if (request.method == "POST") {
        return client.Post(parts.path_and_query, headers, request.body, content_type);
      }
      if (request.method == "GET") {
        return client.Get(parts.path_and_query, headers);
      }
      throw ConfigError("unsupported HTTP method " + request.method);
    }();

    if (!result) {
      throw TransportError("HTTP " + request.method + " " + parts.scheme_host_port + " failed: " +
                           httplib::to_string(result.error()));
    }
    HttpResponse response;
    response.status = result->status;
    response.body = result->body;
    for (const auto& [k, v] : result->headers) response.headers[lower(k)] = v;
    return response;
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

std::optional<std::string> HttpResponse::header(std::string_view name) const {
  auto it = headers.find(lower(std::string(name)));
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

std::shared_ptr<HttpTransport> make_default_transport(std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(timeout);
}

std::string url_encode(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("URL without scheme: " + std::string(url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::optional<std::string> query_param(std::string_view url, std::string_view name) {
  const auto q = url.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  std::string_view query = url.substr(q + 1);
  while (!query.empty()) {
    const auto amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    const auto eq = pair.find('=');
    if (url_decode(pair.substr(0, eq)) == name) {
      return eq == std::string_view::npos ? std::string() : url_decode(pair.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return std::nullopt;
}

}  // namespace augur
