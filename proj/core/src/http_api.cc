// Copyright 2026 The tcrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tcrank/http_api.h"

#include <charconv>
#include <sstream>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "tcrank/btrank.h"
#include "tcrank/pairing.h"

namespace tcrank {
namespace {

using nlohmann::json;

ApiResponse Json(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

ApiResponse ErrorResponse(ErrorCode code, std::string_view message) {
  return Json(HttpStatusFor(code),
              {{"error", ErrorCodeName(code)}, {"message", message}});
}

std::vector<std::string_view> Segments(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) out.push_back(path.substr(i, end - i));
    i = end;
  }
  return out;
}

const std::string& Required(const std::map<std::string, std::string>& query,
                            const std::string& key) {
  const auto it = query.find(key);
  if (it == query.end() || it->second.empty()) {
    throw Error(ErrorCode::kInvalidInput, "missing query parameter " + key);
  }
  return it->second;
}

double ParseNumber(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw Error(ErrorCode::kInvalidInput, what + " is not a number: " + text);
  }
  return v;
}

std::uint64_t ParseSeed(const std::string& text) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kInvalidInput, "seed is not an unsigned integer: " + text);
  }
  return v;
}

json ParseBody(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kParseError, "request body must be a JSON object");
  }
  return j;
}

std::string RequiredString(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::kInvalidInput, std::string("missing string field ") + key);
  }
  return it->get<std::string>();
}

json StatusJson(const PolicyStatus& s) {
  return {{"policy_id", s.policy_id.str()},
          {"statements", s.statements},
          {"total_hits", s.total_hits},
          {"completed", s.completed},
          {"open", s.open},
          {"assigned", s.assigned},
          {"pairs", s.pairs},
          {"pairs_fully_voted", s.pairs_fully_voted}};
}

ApiResponse Route(Service& service, std::string_view method,
                  const std::vector<std::string_view>& seg,
                  const std::map<std::string, std::string>& query,
                  std::string_view body) {
  const bool get = method == "GET";
  const bool post = method == "POST";
  if (post && seg.size() == 1 && seg[0] == "policies") {
    const json j = ParseBody(body);
    const PolicyDocument doc = service.IngestPolicy(
        PolicyId(RequiredString(j, "policy_id")), j.value("source_url", ""),
        RequiredString(j, "raw_text"));
    json statements = json::array();
    for (const auto& s : doc.statements) {
      statements.push_back({{"statement_id", s.id.str()}, {"text", s.text}});
    }
    return Json(201, {{"policy_id", doc.policy_id.str()},
                      {"source_url", doc.source_url},
                      {"statements", statements}});
  }
  if (post && seg.size() == 1 && seg[0] == "workers") {
    const json j = ParseBody(body);
    const WorkerId id(RequiredString(j, "worker_id"));
    const bool qualified = j.value("qualified", true);
    service.RegisterWorker(id, qualified);
    return Json(201, {{"worker_id", id.str()}, {"qualified", qualified}});
  }
  if (get && seg.size() == 1 && seg[0] == "tasks") {
    const TaskAssignment t =
        service.AssignTask(WorkerId(Required(query, "worker_id")));
    return Json(200, {{"hit_id", t.hit_id.str()},
                      {"policy_id", t.policy_id.str()},
                      {"presentation", PresentationName(t.presentation)},
                      {"statement_1", {{"statement_id", t.statement_1.str()},
                                       {"text", t.statement_1_text}}},
                      {"statement_2", {{"statement_id", t.statement_2.str()},
                                       {"text", t.statement_2_text}}},
                      {"source_url", t.source_url},
                      {"options", {"first", "equal", "second"}},
                      {"expires_at_ms", t.expires_at_ms}});
  }
  if (post && seg.size() == 1 && seg[0] == "votes") {
    const json j = ParseBody(body);
    const VoteAck ack = service.SubmitVote(
        WorkerId(RequiredString(j, "worker_id")),
        HitId(RequiredString(j, "hit_id")),
        ParseChoice(RequiredString(j, "choice")));
    return Json(200, {{"hit_id", ack.hit_id.str()},
                      {"statement_a", ack.pair.a.str()},
                      {"statement_b", ack.pair.b.str()},
                      {"choice", ChoiceName(ack.choice)},
                      {"canonical_score", ack.canonical_score},
                      {"sequence", ack.sequence},
                      {"duplicate", ack.duplicate}});
  }
  if (seg.size() == 3 && seg[0] == "policies") {
    const PolicyId policy{std::string(seg[1])};
    if (post && seg[2] == "hits") {
      const double fraction =
          query.contains("fraction") ? ParseNumber(query.at("fraction"), "fraction") : 1.0;
      const std::uint64_t seed =
          query.contains("seed") ? ParseSeed(query.at("seed")) : 0;
      const std::size_t hits = service.GenerateHits(policy, fraction, seed);
      return Json(201, {{"policy_id", policy.str()}, {"hits", hits}});
    }
    if (get && seg[2] == "status") return Json(200, StatusJson(service.Status(policy)));
    if (get && seg[2] == "ranking") {
      FitOptions options;
      if (query.contains("alpha")) options.alpha = ParseNumber(query.at("alpha"), "alpha");
      const BTModel model = service.FitModel(policy, options);
      const Ranking ranking = RankFromModel(model);
      const PolicyDocument doc = service.Policy(policy);
      std::map<StatementId, std::string> texts;
      for (const auto& s : doc.statements) texts[s.id] = s.text;
      json rows = json::array();
      for (std::size_t i = 0; i < ranking.ordered.size(); ++i) {
        const StatementId& id = ranking.ordered[i];
        rows.push_back({{"rank", i + 1},
                        {"statement_id", id.str()},
                        {"theta", model.theta.at(id)},
                        {"text", texts[id]}});
      }
      return Json(200, {{"policy_id", policy.str()},
                        {"converged", model.converged},
                        {"iterations", model.iterations},
                        {"alpha", model.alpha},
                        {"ranking", rows}});
    }
    if (get && seg[2] == "comparisons.csv") {
      std::ostringstream csv;
      WriteComparisonsCsv(csv, service.Comparisons(policy));
      return {200, "text/csv", csv.str()};
    }
  }
  return Json(404, {{"error", "NotFound"},
                    {"message", std::string(method) + " route not found"}});
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownPolicy:
    case ErrorCode::kUnknownWorker:
    case ErrorCode::kUnknownHit:
    case ErrorCode::kUnknownStatement:
    case ErrorCode::kNoTaskAvailable:
      return 404;
    case ErrorCode::kUnqualifiedWorker:
      return 403;
    case ErrorCode::kStaleAssignment:
    case ErrorCode::kConflictingResubmission:
    case ErrorCode::kAlreadyExists:
    case ErrorCode::kInvalidState:
      return 409;
    case ErrorCode::kNoData:
    case ErrorCode::kIncompleteComparison:
      return 422;
    case ErrorCode::kIoError:
      return 500;
    default:
      return 400;
  }
}

ApiResponse HandleApiRequest(Service& service, std::string_view method,
                             std::string_view path,
                             const std::map<std::string, std::string>& query,
                             std::string_view body) {
  try {
    return Route(service, method, Segments(path), query, body);
  } catch (const Error& e) {
    return ErrorResponse(e.code(), e.what());
  } catch (const std::exception& e) {
    return Json(500, {{"error", "Internal"}, {"message", e.what()}});
  }
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(Service& service)
    : impl_(new Impl{service, {}, {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const ApiResponse r =
        HandleApiRequest(impl_->service, req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto& s = impl_->server;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  auto& s = impl_->server;
  const int bound = port == 0 ? s.bind_to_any_port(host)
                              : (s.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kIoError,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::Serve() { impl_->server.listen_after_bind(); }

void HttpServer::Start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tcrank
