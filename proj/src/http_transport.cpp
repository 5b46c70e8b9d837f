#include <httplib.h>

#include "modconf/llm_gateway.hpp"

namespace modconf {

Transport make_http_transport() {
  return [](const TransportRequest& req) -> TransportResult {
    // Split "scheme://host[:port]/prefix/path" into client origin and path.
    auto scheme_end = req.url.find("://");
    auto path_start = req.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    std::string origin = req.url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : req.url.substr(path_start);

    httplib::Client client(origin);
    auto timeout = std::chrono::milliseconds(req.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    client.set_bearer_token_auth(req.api_key);

    TransportResult out;
    auto res = client.Post(path, req.body, "application/json");
    if (!res) {
      out.transport_ok = false;
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  };
}

}  // namespace modconf
