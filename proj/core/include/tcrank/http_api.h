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

// HTTP+JSON front end of the Service.
//
//   POST /policies                       {policy_id, source_url, raw_text}
//   POST /policies/{id}/hits?fraction=&seed=
//   POST /workers                        {worker_id, qualified}
//   GET  /tasks?worker_id=
//   POST /votes                          {worker_id, hit_id, choice}
//   GET  /policies/{id}/status
//   GET  /policies/{id}/ranking?alpha=
//   GET  /policies/{id}/comparisons.csv
//
// Errors are {"error": "<ErrorCode name>", "message": "..."} with a 4xx
// status.

#ifndef TCRANK_HTTP_API_H_
#define TCRANK_HTTP_API_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "tcrank/error.h"
#include "tcrank/service.h"

namespace tcrank {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

int HttpStatusFor(ErrorCode code);

// Transport-independent request handler.
ApiResponse HandleApiRequest(Service& service, std::string_view method,
                             std::string_view path,
                             const std::map<std::string, std::string>& query,
                             std::string_view body);

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; kIoError on failure.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  void Serve();
  // Serve() on a background thread; returns once the server accepts.
  void Start();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tcrank

#endif  // TCRANK_HTTP_API_H_
