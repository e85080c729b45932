#include "cril/server.hpp"

#include <httplib.h>

namespace cril {

struct DebugServer::Impl {
  DebugSession& session;
  httplib::Server http;
};

namespace {

void forward(DebugSession& session, const httplib::Request& req, httplib::Response& res) {
  ApiRequest r{req.method, req.path, {}, req.body};
  for (const auto& [k, v] : req.params) r.query[k] = v;
  auto out = session.handle(r);
  res.status = out.status;
  res.set_content(out.text ? *out.text : out.body.dump(), out.content_type);
}

}  // namespace

DebugServer::DebugServer(DebugSession& session) : impl_(new Impl{session, {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    forward(impl_->session, req, res);
  };
  impl_->http.Get(R"(/api/.*)", handler);
  impl_->http.Post(R"(/api/.*)", handler);
}

DebugServer::~DebugServer() { stop(); }

int DebugServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool DebugServer::listen() { return impl_->http.listen_after_bind(); }

void DebugServer::stop() { impl_->http.stop(); }

void DebugServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace cril
