// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include "httplib.h"
#include "json.hpp"
#include "spatialsens/colormap.hpp"
#include "spatialsens/error.hpp"
#include "spatialsens/mesh.hpp"

namespace spatialsens {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Response json_response(json body, int status = 200) {
  body["schemaVersion"] = kSchemaVersion;
  return {status, "application/json", body.dump()};
}

Response error_response(int status, std::string_view code, const std::string& message) {
  return json_response({{"error", {{"code", code}, {"message", message}}}}, status);
}

int status_for(Errc c) {
  switch (c) {
    case Errc::BadParamIndex:
    case Errc::IndexOutOfBounds: return 404;
    case Errc::MissingFile: return 409;
    case Errc::InvalidArgument:
    case Errc::EmptySelection:
    case Errc::AllAxesFiltered:
    case Errc::NegativeValue:
    case Errc::AllEmpty:
    case Errc::LengthMismatch: return 400;
    default: return 500;
  }
}

// Query helpers: absent -> fallback, unparsable -> InvalidArgument (400).
template <class T>
T query_number(const Request& req, const std::string& key, T fallback) {
  const auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return fallback;
  try {
    std::size_t used = 0;
    if constexpr (std::is_floating_point_v<T>) {
      const double v = std::stod(it->second, &used);
      if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
      return static_cast<T>(v);
    } else {
      if (!it->second.empty() && it->second[0] == '-') throw std::invalid_argument(key);
      const unsigned long long v = std::stoull(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return static_cast<T>(v);
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidArgument, "query parameter '" + key + "' is not a valid number");
  }
}

json dims_json(const GridDims& d) { return json::array({d.nx, d.ny, d.nz}); }

json curve_meta(const SfcCurve& c) {
  return {{"kind", std::string(to_string(c.kind))},
          {"distance", std::string(to_string(c.distance))},
          {"alpha", c.alpha},
          {"refPoint", c.ref_point},
          {"length", c.order.size()}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Service::Service(const ServiceOptions& opts) : opts_(opts), layout_{opts.dataset} {
  ensemble_ = load_ensemble(layout_.manifest());
  for (Measure m : {Measure::Delta, Measure::Sobol, Measure::Dgsa}) {
    if (fs::exists(layout_.sensitivity(m) / "sensitivity.json")) measures_.push_back(m);
  }
  std::optional<Measure> active = opts.measure;
  if (!active && !measures_.empty()) active = measures_.front();
  if (active && std::find(measures_.begin(), measures_.end(), *active) != measures_.end()) {
    fields_ = read_sensitivity(layout_.sensitivity(*active));
    if (!(fields_->dims == ensemble_.dims())) throw Error(Errc::GridMismatch, "sensitivity grid differs from ensemble");
  }
  if (fs::exists(layout_.curve())) {
    curve_ = read_curve(layout_.curve());
    if (!(curve_->dims == ensemble_.dims())) throw Error(Errc::GridMismatch, "curve grid differs from ensemble");
  }
  session_.m = fields_ ? std::min(opts.m, fields_->fields.size()) : opts.m;
}

std::size_t Service::selection_count() const {
  std::shared_lock lock(selections_mutex_);
  return selections_.size();
}

Service::Session Service::session_snapshot() const {
  std::lock_guard lock(session_mutex_);
  return session_;
}

std::shared_ptr<const Selection> Service::selection_by_id(const std::string& id) const {
  std::size_t index = 0;
  try {
    std::size_t used = 0;
    index = std::stoull(id, &used);
    if (used != id.size()) throw std::invalid_argument(id);
  } catch (const std::logic_error&) {
    throw Error(Errc::IndexOutOfBounds, "unknown selection '" + id + "'");
  }
  std::shared_lock lock(selections_mutex_);
  if (index >= selections_.size()) throw Error(Errc::IndexOutOfBounds, "unknown selection '" + id + "'");
  return selections_[index];
}

Response Service::handle(const Request& req) {
  try {
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    if (get && req.path == "/api/meta") return meta();
    const bool known = req.path == "/api/pcp" || req.path == "/api/sensitivity-view" || req.path == "/api/selection" ||
                       req.path == "/api/heatmap" || req.path == "/api/mesh" || req.path == "/api/axis-order";
    if (!known) return error_response(404, "NotFound", "no endpoint " + req.method + " " + req.path);
    if (!preprocessed()) {
      return error_response(409, "NotPreprocessed",
                            "dataset lacks sensitivity volumes or curve.sfc; run the preprocessing commands");
    }
    if (get && req.path == "/api/pcp") return pcp(req);
    if (get && req.path == "/api/sensitivity-view") return sensitivity_view_endpoint(req);
    if (post && req.path == "/api/selection") return create_selection(req);
    if (get && req.path == "/api/heatmap") return heatmap(req);
    if (get && req.path == "/api/mesh") return mesh(req);
    if (post && req.path == "/api/axis-order") return axis_order(req);
    return error_response(405, "MethodNotAllowed", req.method + " not supported on " + req.path);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "MalformedBody", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

Response Service::meta() const {
  json params = json::array();
  for (const auto& p : ensemble_.pspace().params) params.push_back({{"name", p.name}, {"min", p.min}, {"max", p.max}});
  json measures = json::array();
  for (Measure m : measures_) measures.push_back(std::string(to_string(m)));
  json aux = json::array();
  for (const auto& a : ensemble_.aux()) aux.push_back(a.name);
  const Session s = session_snapshot();
  json body = {{"name", ensemble_.name()},
               {"dims", dims_json(ensemble_.dims())},
               {"runs", ensemble_.run_count()},
               {"parameters", params},
               {"measures", measures},
               {"activeMeasure", fields_ ? json(std::string(to_string(fields_->measure))) : json(nullptr)},
               {"curve", curve_ ? curve_meta(*curve_) : json(nullptr)},
               {"aux", aux},
               {"preprocessed", preprocessed()},
               {"session",
                {{"m", s.m},
                 {"axisOrder", s.axis_order},
                 {"subsampleCount", opts_.subsample_count},
                 {"seed", opts_.seed}}}};
  return json_response(std::move(body));
}

Response Service::pcp(const Request& req) {
  const double filter = query_number<double>(req, "filterPct", 0.0);
  if (filter < 0.0 || filter > 100.0) throw Error(Errc::InvalidArgument, "filterPct must lie in [0, 100]");
  const auto seed = query_number<std::uint64_t>(req, "seed", opts_.seed);
  const auto count = query_number<std::size_t>(req, "count", opts_.subsample_count);
  if (count == 0) throw Error(Errc::InvalidArgument, "count must be >= 1");
  Session s;
  {
    std::lock_guard lock(session_mutex_);
    session_.filter_pct = filter;
    s = session_;
  }
  const auto sample = monte_carlo_subsample(fields_->voxel_count(), count, seed);
  const auto p = pcp_payload(*fields_, ensemble_.aux(), sample, filter, s.axis_order);

  json axes = json::array();
  for (const auto& a : p.axes) {
    axes.push_back({{"name", a.name},
                    {"aux", a.aux},
                    {"mean", a.mean},
                    {"sensitiveFraction", a.sensitive_fraction},
                    {"min", a.min},
                    {"max", a.max}});
  }
  json body = {{"measure", std::string(to_string(fields_->measure))},
               {"axes", axes},
               {"excluded", p.excluded},
               {"scale", {{"min", p.scale_min}, {"max", p.scale_max}}},
               {"voxels", p.voxels},
               {"polylines", p.polylines},
               {"seed", seed},
               {"filterPct", filter}};
  if (const auto it = req.query.find("selection"); it != req.query.end() && !it->second.empty()) {
    const auto sel = selection_by_id(it->second);
    std::vector<bool> selected;
    selected.reserve(p.voxels.size());
    for (auto v : p.voxels) selected.push_back(std::binary_search(sel->voxels.begin(), sel->voxels.end(), v));
    body["selection"] = it->second;
    body["selected"] = selected;
  }
  return json_response(std::move(body));
}

Response Service::sensitivity_view_endpoint(const Request& req) {
  const auto seed = query_number<std::uint64_t>(req, "seed", opts_.seed);
  const auto count = query_number<std::size_t>(req, "count", opts_.subsample_count);
  if (count == 0) throw Error(Errc::InvalidArgument, "count must be >= 1");
  Session s;
  {
    std::lock_guard lock(session_mutex_);
    if (req.query.count("m")) {
      const auto m = query_number<std::size_t>(req, "m", session_.m);
      if (m > fields_->fields.size()) {
        throw Error(Errc::InvalidArgument, "m must lie in [0, " + std::to_string(fields_->fields.size()) + "]");
      }
      session_.m = m;
    }
    s = session_;
  }
  const auto order = pcp_axis_order(*fields_, s.filter_pct, s.axis_order);
  const auto sample = monte_carlo_subsample(fields_->voxel_count(), count, seed);
  const auto view = sensitivity_view(*fields_, *curve_, sample, s.m, order);

  json horizons = json::array();
  for (const auto& h : view.horizons) {
    std::vector<std::uint32_t> full;
    std::vector<double> fill;
    for (const auto& smp : h.samples) {
      full.push_back(smp.full_bands);
      fill.push_back(smp.top_fill);
    }
    json colors = json::array();
    for (std::uint32_t b = 0; b <= h.max_band; ++b) colors.push_back(horizon_band_color(b, h.max_band));
    horizons.push_back({{"name", h.name},
                        {"bandwidth", h.bandwidth},
                        {"maxBand", h.max_band},
                        {"fullBands", full},
                        {"topFill", fill},
                        {"bandColors", colors}});
  }
  json lines = json::array();
  for (const auto& l : view.lines) {
    lines.push_back({{"name", l.name}, {"values", l.values}, {"sensitiveVoxels", l.sensitive_voxels}});
  }
  std::vector<std::string> order_names;
  for (auto i : order) order_names.push_back(fields_->param_names[i]);
  json body = {{"measure", std::string(to_string(fields_->measure))},
               {"m", s.m},
               {"axisOrder", order_names},
               {"curveLength", curve_->order.size()},
               {"positions", view.positions},
               {"voxels", view.voxels},
               {"horizons", horizons},
               {"lines", lines},
               {"drawOrder", view.draw_order},
               {"colorRamp", {{"band0", "gray"}, {"bands", "white-to-red"}}}};
  return json_response(std::move(body));
}

Response Service::create_selection(const Request& req) {
  std::vector<PcpBrush> brushes;
  std::vector<CurveInterval> intervals;
  const bool blank = std::all_of(req.body.begin(), req.body.end(), [](unsigned char c) { return std::isspace(c); });
  if (!blank) {
    const json j = json::parse(req.body);
    if (!j.is_object()) throw Error(Errc::InvalidArgument, "selection body must be a JSON object");
    for (const auto& b : j.value("pcpBrushes", json::array())) {
      brushes.push_back({b.at("axis").get<std::string>(), b.at("lo").get<double>(), b.at("hi").get<double>()});
    }
    for (const auto& iv : j.value("sfcIntervals", json::array())) {
      std::int64_t a = 0, b = 0;
      if (iv.is_array() && iv.size() == 2) {
        a = iv[0].get<std::int64_t>();
        b = iv[1].get<std::int64_t>();
      } else {
        a = iv.at("a").get<std::int64_t>();
        b = iv.at("b").get<std::int64_t>();
      }
      const auto limit = static_cast<std::int64_t>(curve_->order.size());
      if (a < 0 || b < 0 || a >= limit) throw Error(Errc::InvalidArgument, "curve interval outside the curve");
      intervals.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(std::min(b, limit - 1))});
    }
  }
  auto sel = std::make_shared<Selection>(resolve_selection(brushes, intervals, *fields_, *curve_, ensemble_.aux()));
  const std::size_t count = sel->voxels.size();
  std::size_t id = 0;
  {
    std::unique_lock lock(selections_mutex_);
    id = selections_.size();
    selections_.push_back(std::move(sel));
  }
  return json_response({{"selectionId", std::to_string(id)}, {"voxelCount", count}});
}

Response Service::heatmap(const Request& req) const {
  const auto sel_it = req.query.find("selection");
  if (sel_it == req.query.end()) throw Error(Errc::InvalidArgument, "heatmap requires a selection id");
  const auto sel = selection_by_id(sel_it->second);
  const auto param_it = req.query.find("param");
  if (param_it == req.query.end()) throw Error(Errc::InvalidArgument, "heatmap requires a parameter");
  std::size_t param = ensemble_.param_count();
  for (std::size_t i = 0; i < ensemble_.param_count(); ++i) {
    if (ensemble_.pspace().params[i].name == param_it->second) param = i;
  }
  if (param == ensemble_.param_count()) {
    // Not a name: accept a numeric index; anything else is an unknown parameter.
    try {
      param = query_number<std::size_t>(req, "param", param);
    } catch (const Error&) {
      param = ensemble_.param_count();
    }
  }
  if (param >= ensemble_.param_count()) throw Error(Errc::BadParamIndex, "unknown parameter '" + param_it->second + "'");
  const auto fill = query_number<int>(req, "fill", 0);
  const auto pbins = query_number<std::size_t>(req, "paramBins", 150);
  const auto cbins = query_number<std::size_t>(req, "curveBins", 500);

  auto grid = heatmap_aggregate(ensemble_, *curve_, sel->voxels, param, pbins, cbins);
  if (fill) grid = nn_fill(grid);
  json values = json::array();
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    values.push_back(grid.filled[i] ? finite_or_null(grid.values[i]) : json(nullptr));
  }
  const auto table = magma_table();
  json ramp = json::array();
  for (const auto& c : table) ramp.push_back(c);
  json body = {{"selection", sel_it->second},
               {"param", grid.param},
               {"paramMin", grid.param_min},
               {"paramMax", grid.param_max},
               {"rows", grid.rows},
               {"cols", grid.cols},
               {"selectionSize", grid.selection_size},
               {"rowFirst", grid.row_first},
               {"rowLast", grid.row_last},
               {"filledGaps", fill != 0},
               {"values", values},
               {"colormap", {{"name", "magma"}, {"table", ramp}}}};
  return json_response(std::move(body));
}

Response Service::mesh(const Request& req) const {
  const auto sel_it = req.query.find("selection");
  if (sel_it == req.query.end()) throw Error(Errc::InvalidArgument, "mesh requires a selection id");
  const auto sel = selection_by_id(sel_it->second);
  const Mesh m = selection_mesh(sel->voxels, ensemble_.dims());
  if (req.accept.find("application/octet-stream") != std::string::npos) {
    const auto bytes = encode_mesh_binary(m);
    return {200, "application/octet-stream", std::string(bytes.begin(), bytes.end())};
  }
  return json_response({{"selection", sel_it->second},
                        {"triangleCount", m.triangle_count()},
                        {"vertices", m.vertices},
                        {"indices", m.indices}});
}

Response Service::axis_order(const Request& req) {
  const json j = json::parse(req.body);
  const auto order = j.at("order").get<std::vector<std::string>>();
  for (const auto& name : order) {
    if (std::find(fields_->param_names.begin(), fields_->param_names.end(), name) == fields_->param_names.end()) {
      throw Error(Errc::BadParamIndex, "unknown axis '" + name + "'");
    }
  }
  std::vector<std::string> names;
  {
    std::lock_guard lock(session_mutex_);
    session_.axis_order = order;
    for (auto i : pcp_axis_order(*fields_, session_.filter_pct, session_.axis_order)) {
      names.push_back(fields_->param_names[i]);
    }
  }
  return json_response({{"axisOrder", names}});
}

int resolve_port(int flag_port) {
  if (const char* env = std::getenv("SPATIALSENS_PORT"); env && *env) {
    try {
      const int p = std::stoi(env);
      if (p > 0 && p < 65536) return p;
    } catch (const std::logic_error&) {
    }
    throw Error(Errc::InvalidArgument, std::string("SPATIALSENS_PORT is not a valid port: ") + env);
  }
  return flag_port;
}

struct HttpFrontend::Impl {
  httplib::Server server;
};

HttpFrontend::HttpFrontend(Service& service) : impl_(std::make_unique<Impl>()) {
  auto route = [&service](const httplib::Request& in, httplib::Response& out) {
    Request req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.query[k] = v;
    req.body = in.body;
    req.accept = in.get_header_value("Accept");
    const Response r = service.handle(req);
    out.status = r.status;
    out.set_header("X-Schema-Version", std::to_string(kSchemaVersion));
    out.set_content(r.body, r.content_type);
  };
  impl_->server.Get(R"(/api/.*)", route);
  impl_->server.Post(R"(/api/.*)", route);
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpFrontend::listen() {
  if (!impl_->server.listen_after_bind()) throw Error(Errc::IoError, "HTTP server stopped unexpectedly");
}

void HttpFrontend::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpFrontend::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void serve_http(Service& service, const std::string& host, int port) {
  HttpFrontend frontend(service);
  const int bound = frontend.bind(host, port);
  std::cerr << "serving on http://" << host << ':' << bound << '\n';
  frontend.listen();
}

}  // namespace spatialsens
