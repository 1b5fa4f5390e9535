// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "spatialsens/ensemble.hpp"
#include "spatialsens/sensitivity.hpp"
#include "spatialsens/sfc.hpp"
#include "spatialsens/viewdata.hpp"

namespace spatialsens {

inline constexpr int kSchemaVersion = 1;

/// Transport-independent HTTP request/response used by the service core.
struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string accept;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Preprocessed dataset layout: <root>/ensemble.json, <root>/sensitivity/<measure>/,
/// <root>/curve.sfc.
struct DatasetLayout {
  std::filesystem::path root;

  [[nodiscard]] std::filesystem::path manifest() const { return root / "ensemble.json"; }
  [[nodiscard]] std::filesystem::path sensitivity(Measure m) const {
    return root / "sensitivity" / std::string(to_string(m));
  }
  [[nodiscard]] std::filesystem::path curve() const { return root / "curve.sfc"; }
};

struct ServiceOptions {
  std::filesystem::path dataset;
  std::optional<Measure> measure;  // default: first available of delta, sobol, dgsa
  std::size_t subsample_count = kDefaultSubsampleCount;
  std::uint64_t seed = 0;
  std::size_t m = 2;  // horizon graph count, clamped to the field count
};

/// Serves view data for one preprocessed dataset. All request handling goes through
/// handle(), which is safe to call concurrently.
class Service {
 public:
  explicit Service(const ServiceOptions& opts);

  Response handle(const Request& req);

  [[nodiscard]] bool preprocessed() const noexcept { return fields_ && curve_; }
  [[nodiscard]] std::size_t selection_count() const;

 private:
  struct Session {
    std::size_t m = 2;
    std::vector<std::string> axis_order;
    double filter_pct = 0.0;
  };

  Response meta() const;
  Response pcp(const Request& req);
  Response sensitivity_view_endpoint(const Request& req);
  Response create_selection(const Request& req);
  Response heatmap(const Request& req) const;
  Response mesh(const Request& req) const;
  Response axis_order(const Request& req);

  std::shared_ptr<const Selection> selection_by_id(const std::string& id) const;
  Session session_snapshot() const;

  ServiceOptions opts_;
  DatasetLayout layout_;
  Ensemble ensemble_;
  std::vector<Measure> measures_;
  std::optional<SensitivityFieldSet> fields_;
  std::optional<SfcCurve> curve_;

  mutable std::mutex session_mutex_;
  Session session_;

  mutable std::shared_mutex selections_mutex_;
  std::vector<std::shared_ptr<const Selection>> selections_;
};

/// Port from SPATIALSENS_PORT when set, otherwise `flag_port`.
int resolve_port(int flag_port);

/// HTTP transport for a Service (one route per /api endpoint).
class HttpFrontend {
 public:
  explicit HttpFrontend(Service& service);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called from another thread.
  void listen();
  /// Blocks until a concurrent listen() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving `service` over HTTP until the process is stopped.
void serve_http(Service& service, const std::string& host, int port);

}  // namespace spatialsens
