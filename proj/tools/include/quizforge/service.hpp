#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// HTTP API for the quiz builder. Every handler is a pure function of the
// request; the server wrapper only moves bytes.
namespace quizforge::service {

struct Request {
  std::string method;
  std::string path;
  std::string body;
};

struct Reply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;

  std::optional<std::string> header(std::string_view name) const;
};

// Manifest of a generated bank, as compact JSON.
inline constexpr const char* kManifestHeader = "X-Quiz-Manifest";

Reply handle(const Request& request);

Reply validate(std::string_view body);
Reply preview(std::string_view body);
Reply generate(std::string_view body);
Reply list_examples();
Reply example(std::string_view id);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> root;  // static files for the UI
  std::string allow_origin = "*";
};

// Blocks until the server stops. Returns false when the socket cannot be bound.
bool serve(const ServerOptions& options, std::ostream& log);

}  // namespace quizforge::service
