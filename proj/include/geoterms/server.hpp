#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "geoterms/layout.hpp"
#include "geoterms/store.hpp"

namespace httplib {
class Server;
}

namespace geoterms {

struct ApiResponse {
  int status = 200;
  std::string body;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

struct ApiOptions {
  std::size_t default_limit = 200;
  std::size_t max_limit = 1000;
  std::size_t default_max_tags = 20;
  double cloud_radius = 150.0;
  LayoutOptions layout;
};

// Shortest JSON number text for value rounded to 3 significant digits.
std::string format_sig3(double value);

// Endpoint logic, independent of the HTTP transport. Bodies are pure
// functions of the dataset snapshot and the query.
class Api {
 public:
  explicit Api(std::shared_ptr<const Store> store = nullptr, ApiOptions options = {});

  // Atomically replaces the snapshot served to subsequent requests.
  void swap(std::shared_ptr<const Store> store);
  std::shared_ptr<const Store> snapshot() const;

  ApiResponse meta() const;
  ApiResponse sites(const QueryParams& params) const;
  ApiResponse cloud(const QueryParams& params) const;
  ApiResponse spark(const QueryParams& params) const;

 private:
  ApiOptions options_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Store> store_;
};

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string cors_origin = "*";
};

// HTTP front end. GET /api/meta, /api/sites, /api/cloud, /api/spark.
class HttpServer {
 public:
  HttpServer(Api& api, ServerOptions options);
  ~HttpServer();

  // Binds; returns the bound port (useful with port 0) or -1.
  int bind();
  // Blocks serving requests until stop().
  bool serve();
  void stop();

 private:
  Api& api_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace geoterms
