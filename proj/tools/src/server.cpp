#include <httplib.h>

#include "quizforge/service.hpp"

namespace quizforge::service {
namespace {

void cors(httplib::Response& res, const std::string& origin) {
  res.set_header("Access-Control-Allow-Origin", origin);
  res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  res.set_header("Access-Control-Allow-Headers", "Content-Type");
  res.set_header("Access-Control-Expose-Headers", std::string("Content-Disposition, ") + kManifestHeader);
}

}  // namespace

bool serve(const ServerOptions& options, std::ostream& log) {
  httplib::Server server;
  if (options.root && !server.set_mount_point("/", options.root->string())) {
    log << "cannot serve files from " << options.root->string() << "\n";
    return false;
  }
  const auto forward = [&options](const httplib::Request& req, httplib::Response& res) {
    const Reply reply = handle({req.method, req.path, req.body});
    res.status = reply.status;
    for (const auto& [k, v] : reply.headers) res.set_header(k, v);
    cors(res, options.allow_origin);
    res.set_content(reply.body, reply.content_type);
  };
  server.Get("/api/.*", forward);
  server.Post("/api/.*", forward);
  server.Put("/api/.*", forward);
  server.Delete("/api/.*", forward);
  server.Options("/api/.*", [&options](const httplib::Request&, httplib::Response& res) {
    cors(res, options.allow_origin);
    res.status = 204;
  });
  server.set_payload_max_length(8u << 20);
  if (!server.bind_to_port(options.host, options.port)) {
    log << "cannot listen on " << options.host << ":" << options.port << "\n";
    return false;
  }
  log << "listening on http://" << options.host << ":" << options.port << "\n" << std::flush;
  return server.listen_after_bind();
}

}  // namespace quizforge::service
