#include <algorithm>
#include <cctype>
#include <cstdio>

#include "archviz/service.hpp"

// After the archviz headers: <resolv.h> defines a `_res` macro that breaks Eigen.
#include <httplib.h>

namespace archviz {

namespace {

ApiRequest to_api(const httplib::Request& req) {
  ApiRequest r;
  r.method = req.method;
  r.path = req.path;
  for (const auto& [k, v] : req.params) r.query.emplace(k, v);
  for (const auto& [k, v] : req.headers) {
    std::string name = k;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    r.headers.emplace(name, v);
  }
  r.body = req.body;
  return r;
}

}  // namespace

int run_server(Service& service, const std::string& host, int port) {
  httplib::Server server;
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse out = service.handle(to_api(req));
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (!out.content_type.empty()) res.set_content(out.body, out.content_type);
  };
  const char* any = R"(/.*)";
  server.Get(any, handler);
  server.Post(any, handler);
  server.Patch(any, handler);
  server.Delete(any, handler);
  server.Options(any, handler);
  std::fprintf(stderr, "archviz: listening on http://%s:%d\n", host.c_str(), port);
  return server.listen(host, port) ? 0 : 1;
}

}  // namespace archviz
